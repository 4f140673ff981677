use super::{check_k, PassCounter};
use crate::error::Result;
use crate::rng::{self, RefRng};
use crate::vector::SparseSelection;

/// `k` coordinates chosen uniformly without replacement.
pub fn rand_k(u: &[f64], k: usize, rng: &mut RefRng) -> Result<SparseSelection> {
    rand_k_counted(u, k, rng).map(|(s, _)| s)
}

pub(crate) fn rand_k_counted(
    u: &[f64],
    k: usize,
    rng: &mut RefRng,
) -> Result<(SparseSelection, PassCounter)> {
    check_k(k, u.len())?;
    let mut idx = rng::sample_without_replacement(rng, u.len(), k);
    idx.sort_unstable();
    Ok((SparseSelection::gather(u, idx), PassCounter::from_touched(u.len() as u64, u.len())))
}
