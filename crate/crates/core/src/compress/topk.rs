use std::cmp::Ordering;

use super::{check_k, PassCounter};
use crate::error::Result;
use crate::vector::SparseSelection;

/// Total order used for exact selection: larger magnitude first, then lower index.
#[inline]
fn by_magnitude(u: &[f64], a: usize, b: usize) -> Ordering {
    u[b].abs().total_cmp(&u[a].abs()).then(a.cmp(&b))
}

/// Indices of the `k` largest-magnitude entries of `u[subset]`, in ascending order.
pub(crate) fn select_top(u: &[f64], mut subset: Vec<usize>, k: usize) -> Vec<usize> {
    if k < subset.len() {
        subset.select_nth_unstable_by(k - 1, |&a, &b| by_magnitude(u, a, b));
        subset.truncate(k);
    }
    subset.sort_unstable();
    subset
}

/// Exact top-k by magnitude via quickselect. Ties go to the lower index.
pub fn top_k(u: &[f64], k: usize) -> Result<SparseSelection> {
    top_k_counted(u, k).map(|(s, _)| s)
}

pub(crate) fn top_k_counted(u: &[f64], k: usize) -> Result<(SparseSelection, PassCounter)> {
    check_k(k, u.len())?;
    let idx = select_top(u, (0..u.len()).collect(), k);
    Ok((SparseSelection::gather(u, idx), PassCounter::from_touched(u.len() as u64, u.len())))
}

/// Exact top-k by a full sort of all indices; same result as [`top_k`].
pub fn top_k_full_sort(u: &[f64], k: usize) -> Result<SparseSelection> {
    check_k(k, u.len())?;
    let mut idx: Vec<usize> = (0..u.len()).collect();
    idx.sort_unstable_by(|&a, &b| by_magnitude(u, a, b));
    idx.truncate(k);
    idx.sort_unstable();
    Ok(SparseSelection::gather(u, idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn picks_largest_magnitudes() {
        let s = top_k(&[3.0, -1.0, 0.0, 2.0], 2).unwrap();
        assert_eq!(s.indices(), &[0, 3]);
        assert_eq!(s.values(), &[3.0, 2.0]);
    }

    #[test]
    fn keeps_sign() {
        let s = top_k(&[0.1, -7.0, 2.0], 1).unwrap();
        assert_eq!(s.values(), &[-7.0]);
    }

    #[test]
    fn ties_prefer_lower_index() {
        let s = top_k(&[1.0, -1.0, 1.0], 2).unwrap();
        assert_eq!(s.indices(), &[0, 1]);
        let s = top_k_full_sort(&[1.0, -1.0, 1.0], 2).unwrap();
        assert_eq!(s.indices(), &[0, 1]);
    }

    #[test]
    fn k_out_of_range() {
        assert!(matches!(top_k(&[1.0, 2.0], 0), Err(Error::Domain(_))));
        assert!(matches!(top_k(&[1.0, 2.0], 3), Err(Error::Domain(_))));
    }

    #[test]
    fn sort_and_select_agree() {
        let u = crate::rng::gaussian_vector(10_000, 2);
        for k in [1, 10, 333, 9_999, 10_000] {
            assert_eq!(top_k(&u, k).unwrap(), top_k_full_sort(&u, k).unwrap());
        }
    }
}
