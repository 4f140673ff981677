use super::topk::select_top;
use super::{check_k, PassCounter};
use crate::error::{Error, Result};
use crate::rng::{self, RefRng};
use crate::vector::SparseSelection;

/// Sampling-based threshold estimate followed by a capped second top-k.
///
/// Stage 1 samples `s = ceil(sample_ratio * d)` coordinates and takes the
/// smallest magnitude among their exact top-`k'`, `k' = max(1, round(k s / d))`.
/// Stage 2 collects every coordinate with `|u_i| >= threshold`; if more than
/// `2k` are collected, an exact top-k over the collected set keeps `k`.
pub fn dgc_k(u: &[f64], k: usize, sample_ratio: f64, rng: &mut RefRng) -> Result<SparseSelection> {
    dgc_k_counted(u, k, sample_ratio, rng).map(|(s, _)| s)
}

pub(crate) fn dgc_k_counted(
    u: &[f64],
    k: usize,
    sample_ratio: f64,
    rng: &mut RefRng,
) -> Result<(SparseSelection, PassCounter)> {
    let d = u.len();
    check_k(k, d)?;
    if !(sample_ratio > 0.0 && sample_ratio <= 1.0) {
        return Err(Error::Domain(format!("sample ratio {sample_ratio} not in (0, 1]")));
    }
    let s = ((sample_ratio * d as f64).ceil() as usize).clamp(1, d);
    let k_sample = ((k as f64 * s as f64 / d as f64).round() as usize).clamp(1, s);

    let sample = rng::sample_without_replacement(rng, d, s);
    let top_in_sample = select_top(u, sample, k_sample);
    let threshold = top_in_sample
        .iter()
        .map(|&i| u[i].abs())
        .fold(f64::INFINITY, f64::min);

    let collected: Vec<usize> = (0..d).filter(|&i| u[i].abs() >= threshold).collect();
    let mut touched = (s + d) as u64;
    let idx = if collected.len() > 2 * k {
        touched += collected.len() as u64;
        select_top(u, collected, k)
    } else {
        collected
    };
    Ok((SparseSelection::gather(u, idx), PassCounter::from_touched(touched, d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compress::top_k;

    #[test]
    fn full_sample_recovers_exact_topk() {
        let u = rng::gaussian_vector(5_000, 9);
        for k in [1, 17, 250] {
            let s = dgc_k(&u, k, 1.0, &mut rng::seeded(0)).unwrap();
            assert_eq!(s, top_k(&u, k).unwrap());
        }
    }

    #[test]
    fn k_eq_d_full_sample_selects_all() {
        let u = [1.0, -2.0, 0.0, 4.0];
        let s = dgc_k(&u, 4, 1.0, &mut rng::seeded(1)).unwrap();
        assert_eq!(s.indices(), &[0, 1, 2, 3]);
    }

    #[test]
    fn cap_keeps_exactly_k_when_overcollected() {
        // constant magnitudes: the threshold admits everything, so the cap triggers
        let u = [1.0; 100];
        let (s, passes) = dgc_k_counted(&u, 10, 0.05, &mut rng::seeded(2)).unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!(s.indices(), &(0..10).collect::<Vec<_>>()[..]);
        assert_eq!(passes.elements_touched, 5 + 100 + 100);
    }

    #[test]
    fn rejects_bad_ratio() {
        assert!(dgc_k(&[1.0], 1, 1.5, &mut rng::seeded(0)).is_err());
    }
}
