use super::{check_k, PassCounter};
use crate::error::Result;
use crate::quantile::normal_ppf;
use crate::vector::{vector_stats, SparseSelection};

const P_MIN: f64 = 1e-12;
const P_MAX: f64 = 1.0 - 1e-12;

/// Initial magnitude threshold from a normal fit of `u`.
///
/// `p = 1 - k/d` is the fraction of coordinates to drop. Magnitudes exceed
/// `t` in both tails, so the quantile is taken at `(1 + p) / 2`, which puts
/// `k/2d` of the mass above `t` on each side.
pub(crate) fn initial_threshold(k: usize, d: usize, mean: f64, std: f64) -> Result<f64> {
    let p = (1.0 - k as f64 / d as f64).clamp(P_MIN, P_MAX);
    let q = 0.5 + 0.5 * p;
    let t = normal_ppf(q, mean, std)?;
    if t > 0.0 {
        Ok(t)
    } else {
        Ok(normal_ppf(q, 0.0, std)?.abs())
    }
}

/// Approximate top-k from a Gaussian quantile threshold with bounded
/// multiplicative refinement.
///
/// The result is not truncated to `k`: if refinement runs out before the
/// count lands in `[2k/3, 4k/3]`, whatever the last threshold selects is
/// returned.
pub fn gaussian_k(u: &[f64], k: usize, refine_iters: usize) -> Result<SparseSelection> {
    gaussian_k_counted(u, k, refine_iters).map(|(s, _)| s)
}

pub(crate) fn gaussian_k_counted(
    u: &[f64],
    k: usize,
    refine_iters: usize,
) -> Result<(SparseSelection, PassCounter)> {
    let d = u.len();
    check_k(k, d)?;
    if k == d {
        // limit of the threshold going to zero
        return Ok((SparseSelection::above(u, 0.0), PassCounter::from_touched(d as u64, d)));
    }

    let stats = vector_stats(u)?;
    let mut touched = d as u64;
    if stats.std == 0.0 {
        // every coordinate is equal; any k of them give the same error
        let sel = SparseSelection::gather(u, (0..k).collect());
        return Ok((sel, PassCounter::from_touched(touched, d)));
    }

    let mut thres = initial_threshold(k, d, stats.mean, stats.std)?;
    let lower = 2.0 * k as f64 / 3.0;
    let upper = 4.0 * k as f64 / 3.0;
    for _ in 0..refine_iters {
        let count = u.iter().filter(|v| v.abs() > thres).count() as f64;
        touched += d as u64;
        if count < lower {
            thres *= 0.5;
        } else if count > upper {
            thres *= 1.5;
        } else {
            break;
        }
    }
    let sel = SparseSelection::above(u, thres);
    touched += d as u64;
    Ok((sel, PassCounter::from_touched(touched, d)))
}
