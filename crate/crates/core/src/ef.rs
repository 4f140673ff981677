//! Error-feedback compression, aggregation and the momentum SGD update.
//!
//! Each worker keeps a residual `eps`. A local step forms `u = g + eps`,
//! compresses it, and keeps `u - densify(selection)` as the next residual,
//! so nothing the compressor drops is lost, only delayed.

use crate::compress::{compress_with_rng, CompressorSpec, PassCounter};
use crate::error::{Error, Result};
use crate::rng;
use crate::vector::{DenseGrad, SparseSelection};

#[derive(Debug, Clone)]
pub struct WorkerState {
    pub worker_id: usize,
    residual: Vec<f64>,
    seed: u64,
    steps: u64,
}

impl WorkerState {
    /// Fresh worker with a zero residual. Compressor randomness for local
    /// step `t` comes from stream `(seed, worker_id, t)`.
    pub fn new(worker_id: usize, dim: usize, seed: u64) -> Self {
        Self {
            worker_id,
            residual: vec![0.0; dim],
            seed,
            steps: 0,
        }
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn dim(&self) -> usize {
        self.residual.len()
    }

    /// Replaces the residual; used to start from a non-zero state in tests
    /// and experiments.
    pub fn set_residual(&mut self, eps: Vec<f64>) -> Result<()> {
        if eps.len() != self.residual.len() {
            return Err(Error::Dimension(format!(
                "residual has d = {}, worker expects {}",
                eps.len(),
                self.residual.len()
            )));
        }
        self.residual = eps;
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }
}

/// Output of one local step.
#[derive(Debug, Clone)]
pub struct LocalStep {
    pub selection: SparseSelection,
    pub passes: PassCounter,
    /// `g + eps` before compression, when requested.
    pub accumulated: Option<Vec<f64>>,
}

/// `u = g + eps`; `s = Comp(u)`; `eps <- u - densify(s)`. Returns `s`.
pub fn ef_local_step(
    w: &mut WorkerState,
    g: &[f64],
    spec: &CompressorSpec,
) -> Result<SparseSelection> {
    Ok(ef_local_step_with(w, g, spec, false)?.selection)
}

pub fn ef_local_step_with(
    w: &mut WorkerState,
    g: &[f64],
    spec: &CompressorSpec,
    keep_accumulated: bool,
) -> Result<LocalStep> {
    if g.len() != w.residual.len() {
        return Err(Error::Structural(format!(
            "gradient has d = {}, residual has d = {}",
            g.len(),
            w.residual.len()
        )));
    }
    let mut u = std::mem::take(&mut w.residual);
    for (ui, gi) in u.iter_mut().zip(g) {
        *ui = gi + *ui;
    }
    let mut rng = rng::stream(w.seed, w.worker_id as u64, w.steps);
    let (selection, passes) = match compress_with_rng(spec, &u, &mut rng) {
        Ok(r) => r,
        Err(e) => {
            // leave the worker usable: residual = u is what it would carry anyway
            w.residual = u;
            return Err(e);
        }
    };
    let accumulated = keep_accumulated.then(|| u.clone());
    for &i in selection.indices() {
        u[i] = 0.0;
    }
    w.residual = u;
    w.steps += 1;
    Ok(LocalStep {
        selection,
        passes,
        accumulated,
    })
}

/// Coordinate-wise mean of the densified selections, summed in list order.
pub fn aggregate(selections: &[SparseSelection], workers: usize) -> Result<DenseGrad> {
    if selections.len() != workers || workers == 0 {
        return Err(Error::Structural(format!(
            "expected {workers} selections, got {}",
            selections.len()
        )));
    }
    let d = selections[0].dim();
    if d == 0 {
        return Err(Error::Dimension("selections have d = 0".into()));
    }
    if let Some(s) = selections.iter().find(|s| s.dim() != d) {
        return Err(Error::Structural(format!(
            "selection dimensions differ: {} vs {d}",
            s.dim()
        )));
    }
    let mut acc = vec![0.0; d];
    for s in selections {
        for (i, v) in s.iter() {
            acc[i] += v;
        }
    }
    let p = workers as f64;
    acc.iter_mut().for_each(|a| *a /= p);
    Ok(DenseGrad::from_vec_unchecked(acc))
}

/// Mean of dense gradients, summed in list order (the uncompressed path).
pub fn aggregate_dense(grads: &[Vec<f64>]) -> Result<Vec<f64>> {
    let d = grads.first().map(Vec::len).unwrap_or(0);
    if d == 0 || grads.iter().any(|g| g.len() != d) {
        return Err(Error::Structural("dense gradients must share d >= 1".into()));
    }
    let mut acc = vec![0.0; d];
    for g in grads {
        for (a, v) in acc.iter_mut().zip(g) {
            *a += v;
        }
    }
    let p = grads.len() as f64;
    acc.iter_mut().for_each(|a| *a /= p);
    Ok(acc)
}

/// Heavy-ball step: `v <- momentum * v + agg`, `x <- x - lr * v`.
///
/// With `momentum == 0` this is plain `x <- x - lr * agg`.
pub fn sgd_update(
    x: &mut [f64],
    agg: &[f64],
    velocity: &mut [f64],
    lr: f64,
    momentum: f64,
) -> Result<()> {
    if x.len() != agg.len() || x.len() != velocity.len() {
        return Err(Error::Dimension(format!(
            "params {}, aggregate {}, velocity {}",
            x.len(),
            agg.len(),
            velocity.len()
        )));
    }
    for ((xi, gi), vi) in x.iter_mut().zip(agg).zip(velocity.iter_mut()) {
        *vi = momentum * *vi + gi;
        *xi -= lr * *vi;
    }
    Ok(())
}
