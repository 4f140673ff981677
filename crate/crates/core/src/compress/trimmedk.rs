use super::{check_k, PassCounter};
use crate::error::{Error, Result};
use crate::vector::SparseSelection;

const R_START: f64 = 0.99;
const R_DECAY: f64 = 0.9;
const R_FLOOR: f64 = 1e-4;

/// Threshold search between the mean and the maximum magnitude.
///
/// `t = A + r (M - A)` with `M = max |u|`, `A = mean |u|`, and `r` shrinking
/// geometrically from 0.99 by 0.9 until at least `k` magnitudes exceed `t`.
/// If `r` drops below 1e-4 first the threshold falls to zero. Everything
/// above the final threshold is kept, so the count usually exceeds `k`.
pub fn trimmed_k(u: &[f64], k: usize) -> Result<SparseSelection> {
    trimmed_k_counted(u, k).map(|(s, _)| s)
}

pub(crate) fn trimmed_k_counted(u: &[f64], k: usize) -> Result<(SparseSelection, PassCounter)> {
    let d = u.len();
    check_k(k, d)?;
    let (max, sum) = u
        .iter()
        .fold((0.0f64, 0.0f64), |(m, s), v| (m.max(v.abs()), s + v.abs()));
    if max == 0.0 {
        return Err(Error::Degenerate("trimmed_k on an all-zero vector".into()));
    }
    let mean = sum / d as f64;
    let mut touched = d as u64;

    let mut r = R_START;
    let mut thres;
    loop {
        thres = mean + r * (max - mean);
        let count = u.iter().filter(|v| v.abs() > thres).count();
        touched += d as u64;
        if count >= k {
            break;
        }
        r *= R_DECAY;
        if r < R_FLOOR {
            thres = 0.0;
            break;
        }
    }
    let sel = SparseSelection::above(u, thres);
    touched += d as u64;
    Ok((sel, PassCounter::from_touched(touched, d)))
}
