//! Sparsification operators behind a single compressor contract.
//!
//! All operators keep selected values bit-identical to the input and compare
//! magnitudes against thresholds with strict `>` unless noted otherwise.

mod dgck;
mod gaussiank;
mod randk;
mod topk;
mod trimmedk;

use std::fmt;
use std::str::FromStr;

pub use dgck::dgc_k;
pub use gaussiank::gaussian_k;
pub use randk::rand_k;
pub use topk::{top_k, top_k_full_sort};
pub use trimmedk::trimmed_k;

use crate::error::{Error, Result};
use crate::rng::{self, RefRng};
use crate::vector::SparseSelection;

pub const DEFAULT_SAMPLE_RATIO: f64 = 0.01;
pub const DEFAULT_REFINE_ITERS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompressorKind {
    TopK,
    RandK,
    GaussianK,
    DgcK,
    TrimmedK,
}

impl CompressorKind {
    pub const ALL: [CompressorKind; 5] = [
        CompressorKind::TopK,
        CompressorKind::RandK,
        CompressorKind::GaussianK,
        CompressorKind::DgcK,
        CompressorKind::TrimmedK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CompressorKind::TopK => "topk",
            CompressorKind::RandK => "randk",
            CompressorKind::GaussianK => "gaussiank",
            CompressorKind::DgcK => "dgck",
            CompressorKind::TrimmedK => "trimmedk",
        }
    }
}

impl fmt::Display for CompressorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CompressorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CompressorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown compressor `{s}`")))
    }
}

/// Number of selected coordinates, either absolute or as a fraction of `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KSpec {
    Count(usize),
    Ratio(f64),
}

impl KSpec {
    /// Resolves to a concrete `k` for dimension `d`; ratios map to
    /// `max(1, round(ratio * d))`.
    pub fn resolve(self, d: usize) -> Result<usize> {
        let k = match self {
            KSpec::Count(k) => k,
            KSpec::Ratio(r) => {
                if !(r > 0.0 && r <= 1.0) {
                    return Err(Error::Domain(format!("k ratio {r} not in (0, 1]")));
                }
                ((r * d as f64).round() as usize).max(1)
            }
        };
        check_k(k, d)?;
        Ok(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressorSpec {
    pub kind: CompressorKind,
    pub k: KSpec,
    /// Sampled fraction for `dgck`.
    pub sample_ratio: f64,
    /// Maximum threshold updates for `gaussiank`.
    pub refine_iters: usize,
    pub seed: u64,
}

impl CompressorSpec {
    pub fn new(kind: CompressorKind, k: KSpec) -> Self {
        Self {
            kind,
            k,
            sample_ratio: DEFAULT_SAMPLE_RATIO,
            refine_iters: DEFAULT_REFINE_ITERS,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sample_ratio(mut self, r: f64) -> Self {
        self.sample_ratio = r;
        self
    }

    pub fn with_refine_iters(mut self, n: usize) -> Self {
        self.refine_iters = n;
        self
    }

    pub fn validate(&self, d: usize) -> Result<usize> {
        if !(self.sample_ratio > 0.0 && self.sample_ratio <= 1.0) {
            return Err(Error::Domain(format!(
                "sample ratio {} not in (0, 1]",
                self.sample_ratio
            )));
        }
        self.k.resolve(d)
    }
}

/// Work done by one compression call, in sweeps over the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PassCounter {
    /// `ceil(elements_touched / d)`, at least 1.
    pub full_passes: u32,
    pub elements_touched: u64,
}

impl PassCounter {
    pub fn from_touched(touched: u64, d: usize) -> Self {
        let d = d.max(1) as u64;
        Self {
            full_passes: touched.div_ceil(d).max(1) as u32,
            elements_touched: touched,
        }
    }
}

pub fn check_k(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::Domain(format!("k = {k} not in [1, {d}]")));
    }
    Ok(())
}

/// Runs the operator named by `spec`, drawing randomness from `spec.seed`.
pub fn compress(spec: &CompressorSpec, u: &[f64]) -> Result<(SparseSelection, PassCounter)> {
    let mut rng = rng::seeded(spec.seed);
    compress_with_rng(spec, u, &mut rng)
}

/// Like [`compress`] but with an explicit generator (used per worker and
/// iteration by the training engine).
pub fn compress_with_rng(
    spec: &CompressorSpec,
    u: &[f64],
    rng: &mut RefRng,
) -> Result<(SparseSelection, PassCounter)> {
    let k = spec.validate(u.len())?;
    match spec.kind {
        CompressorKind::TopK => topk::top_k_counted(u, k),
        CompressorKind::RandK => randk::rand_k_counted(u, k, rng),
        CompressorKind::GaussianK => gaussiank::gaussian_k_counted(u, k, spec.refine_iters),
        CompressorKind::DgcK => dgck::dgc_k_counted(u, k, spec.sample_ratio, rng),
        CompressorKind::TrimmedK => trimmedk::trimmed_k_counted(u, k),
    }
}
