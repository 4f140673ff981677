//! Numerical checks of top-k contraction bounds and gradient shape.
//!
//! For a vector `u` and `1 <= k <= d` the discarded-energy ratio
//! `||u - top_k(u)||^2 / ||u||^2` is compared with the random-k value
//! `1 - k/d` and the tighter `(1 - k/d)^2` that holds for bell-shaped
//! coordinate distributions.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::compress::{rand_k, top_k};
use crate::error::{Error, Result};
use crate::rng::{self, purpose};
use crate::vector::{sorted_pi, sum_squares, CompensatedSum};

/// Second-difference tolerance for the convexity count.
pub const CONVEXITY_TOL: f64 = 1e-12;
/// Tolerance for the reference-line comparison.
pub const LINE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReportRow {
    pub k: usize,
    pub exact_ratio: f64,
    /// `1 - k/d`
    pub loose_bound: f64,
    /// `(1 - k/d)^2`
    pub tight_bound: f64,
}

pub fn loose_bound(k: usize, d: usize) -> f64 {
    1.0 - k as f64 / d as f64
}

pub fn tight_bound(k: usize, d: usize) -> f64 {
    let r = loose_bound(k, d);
    r * r
}

/// Contraction factor `delta = (2kd - k^2) / d^2`, so that
/// `tight_bound = 1 - delta`.
pub fn contraction_delta(k: usize, d: usize) -> f64 {
    let (k, d) = (k as f64, d as f64);
    (2.0 * k * d - k * k) / (d * d)
}

/// `||u - top_k(u)||^2 / ||u||^2`, from the coordinates top-k leaves out.
pub fn exact_ratio(u: &[f64], k: usize) -> Result<f64> {
    let total = sum_squares(u);
    if total == 0.0 {
        return Err(Error::Degenerate("exact_ratio of a zero vector".into()));
    }
    let sel = top_k(u, k)?;
    let mut kept = vec![false; u.len()];
    for &i in sel.indices() {
        kept[i] = true;
    }
    let mut dropped = CompensatedSum::default();
    for (x, keep) in u.iter().zip(&kept) {
        if !keep {
            dropped.add(x * x);
        }
    }
    Ok(dropped.value() / total)
}

/// Same ratio from the sorted normalised magnitudes: the tail sum of
/// `pi^2` past rank `k` over the full sum.
pub fn exact_ratio_via_pi(u: &[f64], k: usize) -> Result<f64> {
    crate::compress::check_k(k, u.len())?;
    let pi = sorted_pi(u)?;
    let total = sum_squares(&pi);
    Ok(sum_squares(&pi[k..]) / total)
}

pub fn bound_report(u: &[f64], ks: &[usize]) -> Result<Vec<BoundReportRow>> {
    let d = u.len();
    ks.iter()
        .map(|&k| {
            Ok(BoundReportRow {
                k,
                exact_ratio: exact_ratio(u, k)?,
                loose_bound: loose_bound(k, d),
                tight_bound: tight_bound(k, d),
            })
        })
        .collect()
}

/// Shape statistics of `s_i = pi_(i)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PiShape {
    /// Grid points where the second difference is below `-CONVEXITY_TOL`.
    pub convex_violations: usize,
    /// Ranks past the head where `s` lies above the reference line.
    pub line_violations: usize,
    /// Leading ranks excluded from the line check.
    pub skip_head: usize,
    /// Index stride of the convexity grid.
    pub stride: usize,
}

/// Reference line at 0-based rank `j`: `1 - j/d`, running from `(0, 1)`
/// towards `(d, 0)`.
pub fn reference_line(j: usize, d: usize) -> f64 {
    1.0 - j as f64 / d as f64
}

pub fn pi_shape_check(u: &[f64]) -> Result<PiShape> {
    let pi = sorted_pi(u)?;
    let s: Vec<f64> = pi.iter().map(|p| p * p).collect();
    Ok(pi_sq_shape(&s))
}

/// [`pi_shape_check`] on an already sorted `pi^2` sequence.
pub fn pi_sq_shape(s: &[f64]) -> PiShape {
    let d = s.len();
    let skip_head = ((1e-4 * d as f64).round() as usize).max(1);
    let stride = if d > 1_000_000 { (d / 10_000).max(1) } else { 1 };

    let line_violations = s
        .iter()
        .enumerate()
        .skip(skip_head)
        .filter(|&(j, &v)| v > reference_line(j, d) + LINE_TOL)
        .count();

    let grid: Vec<f64> = s.iter().step_by(stride).copied().collect();
    let convex_violations = grid
        .windows(3)
        .filter(|w| w[2] - 2.0 * w[1] + w[0] < -CONVEXITY_TOL)
        .count();

    PiShape {
        convex_violations,
        line_violations,
        skip_head,
        stride,
    }
}

/// `(rank, pi^2, reference line)` rows for plotting; rank is 1-based.
pub fn pi_shape_rows(u: &[f64]) -> Result<Vec<(usize, f64, f64)>> {
    let pi = sorted_pi(u)?;
    let d = pi.len();
    Ok(pi
        .iter()
        .enumerate()
        .map(|(j, p)| (j + 1, p * p, reference_line(j, d)))
        .collect())
}

/// Whether `a1 / (a1 + a2 + a3) <= (a1 + a4) / (a1 + a2 + a4)`.
pub fn area_inequality(a1: f64, a2: f64, a3: f64, a4: f64) -> Result<bool> {
    if [a1, a2, a3, a4].iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
        return Err(Error::Domain(format!("areas must be finite and >= 0: {a1}, {a2}, {a3}, {a4}")));
    }
    let lhs_den = a1 + a2 + a3;
    let rhs_den = a1 + a2 + a4;
    if lhs_den == 0.0 || rhs_den == 0.0 {
        return Err(Error::Domain("zero denominator in area ratio".into()));
    }
    Ok(a1 / lhs_den <= (a1 + a4) / rhs_den)
}

/// Cross-multiplied difference of the two sides: `a1 a3 + a4 a2 + a4 a3`.
pub fn area_reduced(a1: f64, a2: f64, a3: f64, a4: f64) -> f64 {
    a1 * a3 + a4 * a2 + a4 * a3
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramData {
    /// `bins + 1` equally spaced edges.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Cumulative fraction at each right edge.
    pub cdf: Vec<f64>,
}

/// Equal-width histogram over `[min, max]` (widened by 0.5 each side when
/// all values are equal). The maximum falls in the last bin.
pub fn histogram(u: &[f64], bins: usize) -> Result<HistogramData> {
    if bins == 0 {
        return Err(Error::Domain("histogram needs at least one bin".into()));
    }
    if u.is_empty() {
        return Err(Error::Dimension("histogram of an empty vector".into()));
    }
    if let Some(x) = u.iter().find(|x| !x.is_finite()) {
        return Err(Error::Numerical(format!("non-finite value {x} in histogram input")));
    }
    let (mut lo, mut hi) = u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in u {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let bin_edges = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + i as f64 * width })
        .collect();
    let n = u.len() as f64;
    let mut run = 0usize;
    let cdf = counts
        .iter()
        .map(|&c| {
            run += c;
            run as f64 / n
        })
        .collect();
    Ok(HistogramData {
        bin_edges,
        counts,
        cdf,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandkCheck {
    pub mean_ratio: f64,
    pub target: f64,
    pub trials: usize,
}

/// Monte Carlo mean of `||u - rand_k(u)||^2 / ||u||^2` over seeded trials;
/// trial `t` draws from stream `(seed, TRIAL, t)`.
pub fn randk_expectation_check(u: &[f64], k: usize, trials: usize, seed: u64) -> Result<RandkCheck> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    crate::compress::check_k(k, u.len())?;
    let total = sum_squares(u);
    if total == 0.0 {
        return Err(Error::Degenerate("rand-k check on a zero vector".into()));
    }
    let trial = |t: usize| -> Result<f64> {
        let mut r = rng::stream(seed, purpose::TRIAL, t as u64);
        let sel = rand_k(u, k, &mut r)?;
        let mut kept = vec![false; u.len()];
        for &i in sel.indices() {
            kept[i] = true;
        }
        let mut dropped = CompensatedSum::default();
        for (x, keep) in u.iter().zip(&kept) {
            if !keep {
                dropped.add(x * x);
            }
        }
        Ok(dropped.value() / total)
    };
    #[cfg(feature = "parallel")]
    let ratios: Vec<f64> = (0..trials).into_par_iter().map(trial).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let ratios: Vec<f64> = (0..trials).map(trial).collect::<Result<_>>()?;
    let mut acc = CompensatedSum::default();
    ratios.iter().for_each(|&r| acc.add(r));
    Ok(RandkCheck {
        mean_ratio: acc.value() / trials as f64,
        target: loose_bound(k, u.len()),
        trials,
    })
}

/// Excess kurtosis `m4 / m2^2 - 3` (0 for a Gaussian, 3 for Laplace).
pub fn excess_kurtosis(u: &[f64]) -> Result<f64> {
    let n = u.len() as f64;
    if u.is_empty() {
        return Err(Error::Dimension("kurtosis of an empty vector".into()));
    }
    let mean = u.iter().sum::<f64>() / n;
    let (m2, m4) = u.iter().fold((0.0, 0.0), |(a, b), x| {
        let c = (x - mean) * (x - mean);
        (a + c, b + c * c)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    if m2 == 0.0 {
        return Err(Error::Degenerate("kurtosis of a constant vector".into()));
    }
    Ok(m4 / (m2 * m2) - 3.0)
}
