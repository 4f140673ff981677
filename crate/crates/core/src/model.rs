//! Fully connected softmax classifiers with exact gradients.
//!
//! A network with layer sizes `[m, C]` is multinomial logistic regression;
//! `[m, h, C]` is a one-hidden-layer MLP, and so on. Parameters are flattened
//! layer by layer as `W` (row-major, `out x in`) followed by `b` (`out`).

use std::str::FromStr;

use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{self, purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::Domain(format!("unknown activation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<usize>,
    activation: Activation,
}

impl Network {
    pub fn new(layers: Vec<usize>, activation: Activation) -> Result<Self> {
        if layers.len() < 2 || layers.contains(&0) {
            return Err(Error::Dimension(format!(
                "network needs at least input and output sizes, all >= 1; got {layers:?}"
            )));
        }
        Ok(Self { layers, activation })
    }

    pub fn logistic(inputs: usize, classes: usize) -> Result<Self> {
        Self::new(vec![inputs, classes], Activation::Relu)
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn inputs(&self) -> usize {
        self.layers[0]
    }

    pub fn classes(&self) -> usize {
        *self.layers.last().unwrap()
    }

    /// Total parameter count `d`.
    pub fn dim(&self) -> usize {
        self.layers.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// `(weight offset, bias offset)` of each layer in the flat vector.
    fn offsets(&self) -> Vec<(usize, usize)> {
        let mut off = 0;
        self.layers
            .windows(2)
            .map(|w| {
                let wo = off;
                off += w[0] * w[1];
                let bo = off;
                off += w[1];
                (wo, bo)
            })
            .collect()
    }

    /// Xavier-uniform weights, zero biases.
    pub fn init(&self, seed: u64) -> Vec<f64> {
        let mut rng = rng::stream(seed, purpose::INIT, 0);
        let mut params = Vec::with_capacity(self.dim());
        for w in self.layers.windows(2) {
            let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
            params.extend((0..w[0] * w[1]).map(|_| rng.random_range(-limit..limit)));
            params.extend(std::iter::repeat_n(0.0, w[1]));
        }
        params
    }

    fn check(&self, params: &[f64], data: &Dataset, batch: &[usize]) -> Result<()> {
        if params.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "params have d = {}, network needs {}",
                params.len(),
                self.dim()
            )));
        }
        if data.features_dim() != self.inputs() || data.classes() > self.classes() {
            return Err(Error::Dimension(format!(
                "dataset is {}-dim with {} classes, network is {:?}",
                data.features_dim(),
                data.classes(),
                self.layers
            )));
        }
        if batch.is_empty() {
            return Err(Error::Dimension("empty batch".into()));
        }
        if let Some(&i) = batch.iter().find(|&&i| i >= data.len()) {
            return Err(Error::Dimension(format!("sample {i} out of range")));
        }
        Ok(())
    }

    /// Activations of every layer for the batch; the last entry holds logits.
    fn forward(&self, params: &[f64], data: &Dataset, batch: &[usize]) -> Vec<Vec<f64>> {
        let b = batch.len();
        let mut acts = Vec::with_capacity(self.layers.len());
        let mut input = Vec::with_capacity(b * self.inputs());
        for &i in batch {
            input.extend(data.row(i).iter().map(|&x| x as f64));
        }
        acts.push(input);
        let n_layers = self.layers.len() - 1;
        for (l, (wo, bo)) in self.offsets().into_iter().enumerate() {
            let (n_in, n_out) = (self.layers[l], self.layers[l + 1]);
            let w = &params[wo..wo + n_in * n_out];
            let bias = &params[bo..bo + n_out];
            let prev = &acts[l];
            let mut out = vec![0.0; b * n_out];
            for s in 0..b {
                let x = &prev[s * n_in..(s + 1) * n_in];
                let row = &mut out[s * n_out..(s + 1) * n_out];
                for (j, o) in row.iter_mut().enumerate() {
                    let wj = &w[j * n_in..(j + 1) * n_in];
                    *o = bias[j] + dot(wj, x);
                }
            }
            if l + 1 < n_layers {
                match self.activation {
                    Activation::Relu => out.iter_mut().for_each(|v| *v = v.max(0.0)),
                    Activation::Tanh => out.iter_mut().for_each(|v| *v = v.tanh()),
                }
            }
            acts.push(out);
        }
        acts
    }

    /// Mean cross-entropy over `batch` and its gradient with respect to `params`.
    pub fn loss_grad(&self, params: &[f64], data: &Dataset, batch: &[usize]) -> Result<(f64, Vec<f64>)> {
        self.check(params, data, batch)?;
        let b = batch.len();
        let c = self.classes();
        let mut acts = self.forward(params, data, batch);

        // logits -> dL/dlogits, in place
        let mut delta = acts.pop().unwrap();
        let mut loss = 0.0;
        for (s, &i) in batch.iter().enumerate() {
            let row = &mut delta[s * c..(s + 1) * c];
            let y = data.label(i);
            let lse = log_sum_exp(row);
            loss += lse - row[y];
            for v in row.iter_mut() {
                *v = (*v - lse).exp() / b as f64;
            }
            row[y] -= 1.0 / b as f64;
        }
        loss /= b as f64;
        if !loss.is_finite() {
            return Err(Error::Numerical(format!("non-finite loss {loss}")));
        }

        let mut grad = vec![0.0; params.len()];
        let offsets = self.offsets();
        for l in (0..offsets.len()).rev() {
            let (wo, bo) = offsets[l];
            let (n_in, n_out) = (self.layers[l], self.layers[l + 1]);
            let a = &acts[l];
            {
                let (gw, gb) = grad[wo..bo + n_out].split_at_mut(n_in * n_out);
                for s in 0..b {
                    let x = &a[s * n_in..(s + 1) * n_in];
                    let ds = &delta[s * n_out..(s + 1) * n_out];
                    for (j, &dj) in ds.iter().enumerate() {
                        if dj != 0.0 {
                            axpy(dj, x, &mut gw[j * n_in..(j + 1) * n_in]);
                        }
                        gb[j] += dj;
                    }
                }
            }
            if l == 0 {
                break;
            }
            let w = &params[wo..wo + n_in * n_out];
            let mut prev = vec![0.0; b * n_in];
            for s in 0..b {
                let ds = &delta[s * n_out..(s + 1) * n_out];
                let ps = &mut prev[s * n_in..(s + 1) * n_in];
                for (j, &dj) in ds.iter().enumerate() {
                    if dj != 0.0 {
                        axpy(dj, &w[j * n_in..(j + 1) * n_in], ps);
                    }
                }
                let hs = &a[s * n_in..(s + 1) * n_in];
                match self.activation {
                    Activation::Relu => ps.iter_mut().zip(hs).for_each(|(p, &h)| {
                        if h <= 0.0 {
                            *p = 0.0
                        }
                    }),
                    Activation::Tanh => ps.iter_mut().zip(hs).for_each(|(p, &h)| *p *= 1.0 - h * h),
                }
            }
            delta = prev;
        }
        Ok((loss, grad))
    }

    /// Mean cross-entropy only.
    pub fn loss(&self, params: &[f64], data: &Dataset, batch: &[usize]) -> Result<f64> {
        self.evaluate(params, data, batch).map(|(l, _)| l)
    }

    /// `(mean cross-entropy, accuracy)` over `idx`, evaluated in chunks.
    pub fn evaluate(&self, params: &[f64], data: &Dataset, idx: &[usize]) -> Result<(f64, f64)> {
        self.check(params, data, idx)?;
        let c = self.classes();
        let mut loss = 0.0;
        let mut correct = 0usize;
        for chunk in idx.chunks(256) {
            let logits = self.forward(params, data, chunk).pop().unwrap();
            for (s, &i) in chunk.iter().enumerate() {
                let row = &logits[s * c..(s + 1) * c];
                let y = data.label(i);
                loss += log_sum_exp(row) - row[y];
                let argmax = row
                    .iter()
                    .enumerate()
                    .fold(0, |best, (j, v)| if *v > row[best] { j } else { best });
                correct += (argmax == y) as usize;
            }
        }
        let n = idx.len() as f64;
        Ok((loss / n, correct as f64 / n))
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for t in 0..4 {
            acc[t] += x[t] * y[t];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
