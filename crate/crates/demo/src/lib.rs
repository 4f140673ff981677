//! WebAssembly bindings for the static demo page in `www/`.
//!
//! The `*_data` functions are plain Rust so they can be tested natively; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use sparsecomm::analysis::{bound_report, excess_kurtosis, histogram, pi_shape_check};
use sparsecomm::compress::top_k;
use sparsecomm::rng::{sample_vector, Dist};
use sparsecomm::{compress, CompressorKind, CompressorSpec, KSpec};
use wasm_bindgen::prelude::*;

/// Largest dimension the page may request; keeps the tab responsive.
pub const MAX_DIM: usize = 2_000_000;

fn check_dim(d: usize) -> Result<(), String> {
    if d == 0 || d > MAX_DIM {
        return Err(format!("d must be in 1..={MAX_DIM}"));
    }
    Ok(())
}

fn dist(name: &str) -> Result<Dist, String> {
    name.parse()
}

/// Exact top-k error ratio and both bounds over log-spaced k.
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    ks: Vec<f64>,
    exact: Vec<f64>,
    tight: Vec<f64>,
    loose: Vec<f64>,
    line_violations: usize,
}

#[wasm_bindgen]
impl BoundCurve {
    #[wasm_bindgen(getter)]
    pub fn ks(&self) -> Vec<f64> {
        self.ks.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn exact(&self) -> Vec<f64> {
        self.exact.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn tight(&self) -> Vec<f64> {
        self.tight.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn loose(&self) -> Vec<f64> {
        self.loose.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn line_violations(&self) -> usize {
        self.line_violations
    }
}

/// `points` log-spaced k values from 1 to d, deduplicated.
pub fn log_ks(d: usize, points: usize) -> Vec<usize> {
    let n = points.max(2);
    let mut ks: Vec<usize> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            ((d as f64).powf(t).round() as usize).clamp(1, d)
        })
        .collect();
    ks.dedup();
    ks
}

pub fn bound_curve_data(d: usize, dist_name: &str, seed: u64, points: usize) -> Result<BoundCurve, String> {
    check_dim(d)?;
    let u = sample_vector(dist(dist_name)?, d, seed);
    let ks = log_ks(d, points);
    let rows = bound_report(&u, &ks).map_err(|e| e.to_string())?;
    let shape = pi_shape_check(&u).map_err(|e| e.to_string())?;
    Ok(BoundCurve {
        ks: rows.iter().map(|r| r.k as f64).collect(),
        exact: rows.iter().map(|r| r.exact_ratio).collect(),
        tight: rows.iter().map(|r| r.tight_bound).collect(),
        loose: rows.iter().map(|r| r.loose_bound).collect(),
        line_violations: shape.line_violations,
    })
}

#[wasm_bindgen]
pub fn bound_curve(d: usize, dist: &str, seed: u64, points: usize) -> Result<BoundCurve, JsError> {
    bound_curve_data(d, dist, seed, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<f64>,
    cdf: Vec<f64>,
    kurtosis: f64,
}

#[wasm_bindgen]
impl Histogram {
    #[wasm_bindgen(getter)]
    pub fn edges(&self) -> Vec<f64> {
        self.edges.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn counts(&self) -> Vec<f64> {
        self.counts.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn cdf(&self) -> Vec<f64> {
        self.cdf.clone()
    }
    /// Excess kurtosis of the sample.
    #[wasm_bindgen(getter)]
    pub fn kurtosis(&self) -> f64 {
        self.kurtosis
    }
}

pub fn histogram_data(d: usize, dist_name: &str, seed: u64, bins: usize) -> Result<Histogram, String> {
    check_dim(d)?;
    let u = sample_vector(dist(dist_name)?, d, seed);
    let h = histogram(&u, bins).map_err(|e| e.to_string())?;
    let kurtosis = excess_kurtosis(&u).unwrap_or(f64::NAN);
    Ok(Histogram {
        edges: h.bin_edges,
        counts: h.counts.iter().map(|&c| c as f64).collect(),
        cdf: h.cdf,
        kurtosis,
    })
}

#[wasm_bindgen]
pub fn histogram_of(d: usize, dist: &str, seed: u64, bins: usize) -> Result<Histogram, JsError> {
    histogram_data(d, dist, seed, bins).map_err(|e| JsError::new(&e))
}

/// One row per operator: selected count, full passes, recall against exact
/// top-k and the kept share of top-k's energy.
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    names: Vec<String>,
    selected: Vec<f64>,
    passes: Vec<f64>,
    recall: Vec<f64>,
    energy: Vec<f64>,
}

#[wasm_bindgen]
impl Comparison {
    #[wasm_bindgen(getter)]
    pub fn names(&self) -> Vec<String> {
        self.names.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn selected(&self) -> Vec<f64> {
        self.selected.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn passes(&self) -> Vec<f64> {
        self.passes.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn recall(&self) -> Vec<f64> {
        self.recall.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn energy(&self) -> Vec<f64> {
        self.energy.clone()
    }
}

pub fn compare_data(d: usize, k: usize, dist_name: &str, seed: u64) -> Result<Comparison, String> {
    check_dim(d)?;
    let u = sample_vector(dist(dist_name)?, d, seed);
    let exact = top_k(&u, k).map_err(|e| e.to_string())?;
    let mut in_exact = vec![false; d];
    for &i in exact.indices() {
        in_exact[i] = true;
    }
    let mut out = Comparison {
        names: Vec::new(),
        selected: Vec::new(),
        passes: Vec::new(),
        recall: Vec::new(),
        energy: Vec::new(),
    };
    for kind in CompressorKind::ALL {
        let spec = CompressorSpec::new(kind, KSpec::Count(k)).with_seed(seed);
        let (sel, passes) = compress(&spec, &u).map_err(|e| e.to_string())?;
        let hits = sel.indices().iter().filter(|&&i| in_exact[i]).count();
        out.names.push(kind.name().to_string());
        out.selected.push(sel.len() as f64);
        out.passes.push(passes.full_passes as f64);
        out.recall.push(hits as f64 / k as f64);
        out.energy.push(sel.l2_sq() / exact.l2_sq());
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn compare_selectors(d: usize, k: usize, dist: &str, seed: u64) -> Result<Comparison, JsError> {
    compare_data(d, k, dist, seed).map_err(|e| JsError::new(&e))
}
