//! Reference random number generation.
//!
//! Every random draw in the crate comes from ChaCha8 (`rand_chacha`), a
//! counter-based generator whose output is fixed by `(seed, stream, word
//! position)` on every platform. Independent streams are derived from a
//! global seed by setting the ChaCha stream id:
//!
//! * `stream = (worker << 40) | iteration` for per-worker, per-iteration draws;
//! * named purposes (data shuffles, initialisation, synthetic vectors) use
//!   worker ids at or above [`RESERVED_WORKER_BASE`].
//!
//! Sampling without replacement is a partial Fisher-Yates shuffle driven by
//! 64-bit uniform draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type RefRng = ChaCha8Rng;

pub const RESERVED_WORKER_BASE: u64 = 0xFF_0000;
const ITER_BITS: u32 = 40;

/// Generator for a bare seed (stream 0).
pub fn seeded(seed: u64) -> RefRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for `(seed, worker, iteration)`.
pub fn stream(seed: u64, worker: u64, iteration: u64) -> RefRng {
    debug_assert!(iteration < 1 << ITER_BITS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((worker << ITER_BITS) | (iteration & ((1 << ITER_BITS) - 1)));
    rng
}

pub(crate) mod purpose {
    pub const SHUFFLE: u64 = super::RESERVED_WORKER_BASE;
    pub const INIT: u64 = super::RESERVED_WORKER_BASE + 1;
    pub const SYNTH: u64 = super::RESERVED_WORKER_BASE + 2;
    pub const TRIAL: u64 = super::RESERVED_WORKER_BASE + 3;
}

/// First `k` entries of a partial Fisher-Yates shuffle of `0..d`.
///
/// The returned indices are in draw order, not sorted.
pub fn sample_without_replacement(rng: &mut RefRng, d: usize, k: usize) -> Vec<usize> {
    assert!(k <= d);
    let mut idx: Vec<usize> = (0..d).collect();
    for i in 0..k {
        let j = i + rng.random_range(0..(d - i) as u64) as usize;
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

/// Synthetic coordinate distributions for vector experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dist {
    Gaussian,
    Laplace,
    Uniform,
    Constant,
}

impl std::str::FromStr for Dist {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gaussian" | "normal" => Ok(Dist::Gaussian),
            "laplace" => Ok(Dist::Laplace),
            "uniform" => Ok(Dist::Uniform),
            "constant" => Ok(Dist::Constant),
            other => Err(format!("unknown distribution `{other}`")),
        }
    }
}

/// `d` draws from `dist` (zero-centred, unit scale; constant is all ones).
pub fn sample_vector(dist: Dist, d: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, purpose::SYNTH, 0);
    match dist {
        Dist::Gaussian => (0..d).map(|_| StandardNormal.sample(&mut rng)).collect(),
        Dist::Laplace => (0..d)
            .map(|_| {
                // inverse CDF on (-1/2, 1/2)
                let v: f64 = rng.random::<f64>() - 0.5;
                let v = if v == -0.5 { -0.5 + f64::EPSILON } else { v };
                -v.signum() * (1.0 - 2.0 * v.abs()).ln()
            })
            .collect(),
        Dist::Uniform => (0..d).map(|_| rng.random_range(-1.0..1.0)).collect(),
        Dist::Constant => vec![1.0; d],
    }
}

pub fn gaussian_vector(d: usize, seed: u64) -> Vec<f64> {
    sample_vector(Dist::Gaussian, d, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: u64 = stream(7, 0, 0).random();
        let b: u64 = stream(7, 1, 0).random();
        let c: u64 = stream(7, 0, 1).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, stream(7, 0, 0).random::<u64>());
    }

    #[test]
    fn fisher_yates_is_a_permutation_prefix() {
        let mut rng = seeded(3);
        let mut s = sample_without_replacement(&mut rng, 50, 50);
        s.sort_unstable();
        assert_eq!(s, (0..50).collect::<Vec<_>>());
        let s = sample_without_replacement(&mut rng, 50, 7);
        let mut t = s.clone();
        t.sort_unstable();
        t.dedup();
        assert_eq!(t.len(), 7);
    }

    #[test]
    fn laplace_is_symmetric_with_unit_scale() {
        let v = sample_vector(Dist::Laplace, 200_000, 1);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let mean_abs = v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64;
        assert!(mean.abs() < 0.02);
        assert!((mean_abs - 1.0).abs() < 0.02);
    }
}
