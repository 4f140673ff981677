//! Synchronous data-parallel training with simulated workers.
//!
//! Every iteration each of the `P` workers computes a minibatch gradient on
//! its own shard, runs an error-feedback local step, and the selections are
//! averaged in worker-id order. One momentum SGD step is then applied to the
//! shared parameters. Momentum lives on the aggregated update (server side).
//!
//! Shards: epoch `e` draws a seeded permutation of the dataset; at
//! iteration `j` of the epoch worker `p` takes the `B` samples starting at
//! `(j P + p) B`. Leftover samples at the end of an epoch are skipped.

use std::collections::BTreeSet;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::compress::CompressorSpec;
use crate::data::{epoch_permutation, Dataset};
use crate::ef::{aggregate, aggregate_dense, ef_local_step_with, sgd_update, WorkerState};
use crate::error::{Error, Result};
use crate::model::Network;
use crate::vector::{sum_squares, SparseSelection};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDecay {
    pub every_epochs: usize,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub workers: usize,
    pub lr: f64,
    pub momentum: f64,
    pub epochs: usize,
    /// Per-worker minibatch size.
    pub batch_size: usize,
    /// `None` trains with dense (uncompressed) gradients.
    pub compressor: Option<CompressorSpec>,
    pub network: Network,
    pub seed: u64,
    pub lr_decay: Option<StepDecay>,
    /// Stop after this many iterations even if epochs remain.
    pub max_iters: Option<usize>,
    /// Iterations at which worker 0's accumulated vector `g + eps` is kept.
    pub snapshot_iters: BTreeSet<usize>,
}

impl TrainConfig {
    pub fn new(network: Network, workers: usize, lr: f64, seed: u64) -> Self {
        Self {
            workers,
            lr,
            momentum: 0.9,
            epochs: 1,
            batch_size: 32,
            compressor: None,
            network,
            seed,
            lr_decay: None,
            max_iters: None,
            snapshot_iters: BTreeSet::new(),
        }
    }

    pub fn validate(&self, data: &Dataset) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::Domain("need at least one worker".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Domain(format!("learning rate {} must be > 0", self.lr)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Domain(format!("momentum {} not in [0, 1)", self.momentum)));
        }
        if self.batch_size == 0 {
            return Err(Error::Domain("batch size must be >= 1".into()));
        }
        if let Some(decay) = self.lr_decay {
            if decay.every_epochs == 0 || !(decay.factor > 0.0) {
                return Err(Error::Domain("lr decay needs every_epochs >= 1 and factor > 0".into()));
            }
        }
        if data.len() < self.workers * self.batch_size {
            return Err(Error::Domain(format!(
                "{} samples cannot fill {} workers x batch {}",
                data.len(),
                self.workers,
                self.batch_size
            )));
        }
        if let Some(spec) = &self.compressor {
            spec.validate(self.network.dim())?;
        }
        Ok(())
    }

    pub fn iters_per_epoch(&self, n: usize) -> usize {
        n / (self.workers * self.batch_size)
    }

    pub fn lr_at_epoch(&self, epoch: usize) -> f64 {
        match self.lr_decay {
            Some(d) => self.lr * d.factor.powi((epoch / d.every_epochs) as i32),
            None => self.lr,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    /// Mean of the workers' minibatch losses.
    pub loss: f64,
    pub agg_l2sq: f64,
    pub comm_count_cum: u64,
    pub sel_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub eval_loss: f64,
    pub eval_acc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub iter: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub dim: usize,
    /// Resolved `k`, or `None` for dense training.
    pub k: Option<usize>,
    pub workers: usize,
    pub iters: Vec<IterRecord>,
    pub epochs: Vec<EpochRecord>,
    pub snapshots: Vec<Snapshot>,
    pub params: Vec<f64>,
}

impl TrainLog {
    pub fn final_eval_loss(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.eval_loss)
    }
}

/// Single-owner training state advanced one synchronous iteration at a time.
pub struct Trainer<'a> {
    cfg: TrainConfig,
    data: &'a Dataset,
    params: Vec<f64>,
    velocity: Vec<f64>,
    workers: Vec<WorkerState>,
    k: Option<usize>,
    iter: usize,
    iters_per_epoch: usize,
    perm: Vec<usize>,
    comm_cum: u64,
}

/// One worker's contribution to an iteration.
struct WorkerOut {
    loss: f64,
    selection: Option<SparseSelection>,
    dense: Option<Vec<f64>>,
    accumulated: Option<Vec<f64>>,
}

impl<'a> Trainer<'a> {
    pub fn new(cfg: TrainConfig, data: &'a Dataset) -> Result<Self> {
        cfg.validate(data)?;
        let d = cfg.network.dim();
        let k = cfg.compressor.map(|s| s.validate(d)).transpose()?;
        let params = cfg.network.init(cfg.seed);
        let worker_seed = cfg.seed ^ cfg.compressor.map_or(0, |s| s.seed.rotate_left(32));
        let workers = (0..cfg.workers)
            .map(|p| WorkerState::new(p, d, worker_seed))
            .collect();
        Ok(Self {
            iters_per_epoch: cfg.iters_per_epoch(data.len()),
            velocity: vec![0.0; d],
            params,
            workers,
            k,
            iter: 0,
            perm: Vec::new(),
            comm_cum: 0,
            data,
            cfg,
        })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn iteration(&self) -> usize {
        self.iter
    }

    pub fn epoch(&self) -> usize {
        self.iter / self.iters_per_epoch
    }

    pub fn iters_per_epoch(&self) -> usize {
        self.iters_per_epoch
    }

    pub fn workers(&self) -> &[WorkerState] {
        &self.workers
    }

    fn batch(&self, worker: usize) -> &[usize] {
        let j = self.iter % self.iters_per_epoch;
        let b = self.cfg.batch_size;
        let start = (j * self.cfg.workers + worker) * b;
        &self.perm[start..start + b]
    }

    /// Runs one synchronous iteration; returns its record and, if requested
    /// for this iteration, worker 0's accumulated vector.
    pub fn step(&mut self) -> Result<(IterRecord, Option<Snapshot>)> {
        let t = self.iter;
        if t % self.iters_per_epoch == 0 {
            self.perm = epoch_permutation(self.cfg.seed, self.epoch(), self.data.len());
        }
        let snap = self.cfg.snapshot_iters.contains(&t);
        let batches: Vec<Vec<usize>> = (0..self.cfg.workers).map(|p| self.batch(p).to_vec()).collect();

        let net = &self.cfg.network;
        let params = &self.params;
        let data = self.data;
        let spec = self.cfg.compressor;
        let run = |(w, batch): (&mut WorkerState, &Vec<usize>)| -> Result<WorkerOut> {
            let (loss, g) = net.loss_grad(params, data, batch).map_err(|e| match e {
                Error::Numerical(_) => Error::Diverged { iter: t, loss: f64::NAN },
                e => e,
            })?;
            let keep = snap && w.worker_id == 0;
            match &spec {
                Some(spec) => {
                    let step = ef_local_step_with(w, &g, spec, keep)?;
                    Ok(WorkerOut {
                        loss,
                        selection: Some(step.selection),
                        dense: None,
                        accumulated: step.accumulated,
                    })
                }
                None => Ok(WorkerOut {
                    loss,
                    selection: None,
                    accumulated: keep.then(|| g.clone()),
                    dense: Some(g),
                }),
            }
        };
        #[cfg(feature = "parallel")]
        let outs: Vec<WorkerOut> = self
            .workers
            .par_iter_mut()
            .zip(batches.par_iter())
            .map(run)
            .collect::<Result<_>>()?;
        #[cfg(not(feature = "parallel"))]
        let outs: Vec<WorkerOut> = self
            .workers
            .iter_mut()
            .zip(batches.iter())
            .map(run)
            .collect::<Result<_>>()?;

        let p = self.cfg.workers as f64;
        let loss = outs.iter().map(|o| o.loss).sum::<f64>() / p;
        if !loss.is_finite() {
            return Err(Error::Diverged { iter: t, loss });
        }
        let d = self.params.len();
        let mut snapshot = None;
        let mut sel_counts = Vec::with_capacity(outs.len());
        let mut selections = Vec::new();
        let mut dense = Vec::new();
        for (i, o) in outs.into_iter().enumerate() {
            if i == 0 {
                snapshot = o.accumulated.map(|values| Snapshot { iter: t, values });
            }
            match (o.selection, o.dense) {
                (Some(s), _) => {
                    sel_counts.push(s.len());
                    selections.push(s);
                }
                (None, Some(g)) => {
                    sel_counts.push(d);
                    dense.push(g);
                }
                (None, None) => unreachable!(),
            }
        }
        let agg = if spec.is_some() {
            aggregate(&selections, self.cfg.workers)?.into_vec()
        } else {
            aggregate_dense(&dense)?
        };
        let agg_l2sq = sum_squares(&agg);
        let lr = self.cfg.lr_at_epoch(self.epoch());
        sgd_update(&mut self.params, &agg, &mut self.velocity, lr, self.cfg.momentum)?;
        if let Some(i) = self.params.iter().position(|x| !x.is_finite()) {
            return Err(Error::Diverged {
                iter: t,
                loss: self.params[i],
            });
        }
        self.comm_cum += sel_counts.iter().map(|&c| c as u64).sum::<u64>();
        self.iter += 1;
        Ok((
            IterRecord {
                iter: t,
                loss,
                agg_l2sq,
                comm_count_cum: self.comm_cum,
                sel_counts,
            },
            snapshot,
        ))
    }

    pub fn evaluate(&self, eval: &Dataset) -> Result<(f64, f64)> {
        let idx: Vec<usize> = (0..eval.len()).collect();
        self.cfg.network.evaluate(&self.params, eval, &idx)
    }
}

/// Trains for `cfg.epochs` epochs (or `cfg.max_iters` iterations) and logs
/// every iteration plus an evaluation after each completed epoch. `eval`
/// defaults to the training set.
pub fn train(cfg: &TrainConfig, data: &Dataset, eval: Option<&Dataset>) -> Result<TrainLog> {
    let mut trainer = Trainer::new(cfg.clone(), data)?;
    let eval = eval.unwrap_or(data);
    let total = cfg.epochs * trainer.iters_per_epoch();
    let total = cfg.max_iters.map_or(total, |m| m.min(total));
    let mut log = TrainLog {
        dim: cfg.network.dim(),
        k: trainer.k,
        workers: cfg.workers,
        iters: Vec::with_capacity(total),
        epochs: Vec::new(),
        snapshots: Vec::new(),
        params: Vec::new(),
    };
    for _ in 0..total {
        let (rec, snap) = trainer.step()?;
        log.iters.push(rec);
        log.snapshots.extend(snap);
        if trainer.iteration() % trainer.iters_per_epoch() == 0 {
            let (eval_loss, eval_acc) = trainer.evaluate(eval)?;
            log.epochs.push(EpochRecord {
                epoch: trainer.epoch(),
                eval_loss,
                eval_acc,
            });
        }
    }
    log.params = trainer.params.clone();
    Ok(log)
}
