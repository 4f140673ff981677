//! Wall-clock and pass-count comparison of compressors on Gaussian vectors.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::compress::{compress, top_k, top_k_full_sort, CompressorKind, CompressorSpec, KSpec, PassCounter};
use crate::error::{Error, Result};
use crate::rng;
use crate::vector::SparseSelection;

/// Default ceiling on the working set of one benchmark dimension.
pub const DEFAULT_MAX_BYTES: u128 = 16 << 30;

/// A compressor, or the full-sort exact top-k baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchKind {
    Op(CompressorKind),
    TopKSort,
}

impl fmt::Display for BenchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchKind::Op(k) => f.write_str(k.name()),
            BenchKind::TopKSort => f.write_str("topk-sort"),
        }
    }
}

impl FromStr for BenchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "topk-sort" => Ok(BenchKind::TopKSort),
            other => other.parse().map(BenchKind::Op),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub d: usize,
    pub k: usize,
    pub kind: BenchKind,
    pub wall_ms: f64,
    pub full_passes: u32,
    pub selected_count: usize,
    /// `|selected ∩ exact top-k| / k`
    pub recall: f64,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub dims: Vec<usize>,
    pub k_ratio: f64,
    pub kinds: Vec<BenchKind>,
    pub repeats: usize,
    pub seed: u64,
    pub max_bytes: u128,
}

/// Bytes touched per coordinate: the vector, an index array and a mask.
const BYTES_PER_COORD: u128 = 8 + 8 + 8 + 8;

fn run_once(kind: BenchKind, u: &[f64], k: usize, seed: u64) -> Result<(SparseSelection, PassCounter)> {
    match kind {
        BenchKind::Op(op) => compress(&CompressorSpec::new(op, KSpec::Count(k)).with_seed(seed), u),
        BenchKind::TopKSort => Ok((top_k_full_sort(u, k)?, PassCounter::from_touched(u.len() as u64, u.len()))),
    }
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_unstable_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// For every `(d, kind)`: one warm-up, then `repeats` timed runs on the same
/// seeded Gaussian vector. Passes, count and recall come from the last run.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.repeats < 3 {
        return Err(Error::Domain(format!("need at least 3 repeats, got {}", cfg.repeats)));
    }
    let mut rows = Vec::new();
    for &d in &cfg.dims {
        if d == 0 {
            return Err(Error::Dimension("benchmark dimension must be >= 1".into()));
        }
        let need = d as u128 * BYTES_PER_COORD;
        if need > cfg.max_bytes {
            return Err(Error::TooLarge {
                requested: need,
                limit: cfg.max_bytes,
            });
        }
        let k = KSpec::Ratio(cfg.k_ratio).resolve(d)?;
        let u = rng::gaussian_vector(d, cfg.seed);
        let exact: HashSet<usize> = top_k(&u, k)?.indices().iter().copied().collect();
        for &kind in &cfg.kinds {
            run_once(kind, &u, k, cfg.seed)?;
            let mut times = Vec::with_capacity(cfg.repeats);
            let mut last = None;
            for _ in 0..cfg.repeats {
                let t0 = Instant::now();
                let out = run_once(kind, &u, k, cfg.seed)?;
                times.push((t0.elapsed().as_secs_f64() * 1e3).max(1e-6));
                last = Some(out);
            }
            let (sel, passes) = last.unwrap();
            let hits = sel.indices().iter().filter(|i| exact.contains(i)).count();
            rows.push(BenchRow {
                d,
                k,
                kind,
                wall_ms: median(&mut times),
                full_passes: passes.full_passes,
                selected_count: sel.len(),
                recall: hits as f64 / k as f64,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kinds: Vec<BenchKind>) -> BenchConfig {
        BenchConfig {
            dims: vec![20_000],
            k_ratio: 0.001,
            kinds,
            repeats: 3,
            seed: 1,
            max_bytes: DEFAULT_MAX_BYTES,
        }
    }

    #[test]
    fn exact_baselines_have_full_recall() {
        let rows = run_bench(&cfg(vec![BenchKind::Op(CompressorKind::TopK), BenchKind::TopKSort])).unwrap();
        for r in rows {
            assert_eq!(r.recall, 1.0);
            assert_eq!(r.selected_count, 20);
            assert!(r.wall_ms > 0.0);
        }
    }

    #[test]
    fn gaussiank_pass_ceiling() {
        let rows = run_bench(&cfg(vec![BenchKind::Op(CompressorKind::GaussianK)])).unwrap();
        assert!(rows[0].full_passes <= 10);
    }

    #[test]
    fn size_guard_and_repeats() {
        let mut c = cfg(vec![BenchKind::TopKSort]);
        c.max_bytes = 1000;
        assert!(matches!(run_bench(&c), Err(Error::TooLarge { .. })));
        let mut c = cfg(vec![BenchKind::TopKSort]);
        c.repeats = 2;
        assert!(run_bench(&c).is_err());
    }

    #[test]
    fn kind_names() {
        assert_eq!("topk-sort".parse::<BenchKind>().unwrap(), BenchKind::TopKSort);
        assert_eq!("dgck".parse::<BenchKind>().unwrap().to_string(), "dgck");
        assert!("x".parse::<BenchKind>().is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
