//! Datasets: IDX (MNIST-format) files and seeded synthetic Gaussian classes.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{self, purpose};

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Default expected distance between two synthetic class means, in noise
/// standard deviations.
pub const SYNTH_SEPARATION: f64 = 4.0;

/// Row-major `n x m` features with labels in `[0, classes)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f32>,
    labels: Vec<u32>,
    n: usize,
    m: usize,
    classes: usize,
}

impl Dataset {
    pub fn new(features: Vec<f32>, labels: Vec<u32>, m: usize, classes: usize) -> Result<Self> {
        let n = labels.len();
        if n == 0 || m == 0 || classes == 0 {
            return Err(Error::Dimension(format!("dataset needs n, m, C >= 1 (n={n}, m={m}, C={classes})")));
        }
        if features.len() != n * m {
            return Err(Error::Dimension(format!(
                "{} feature values for n = {n}, m = {m}",
                features.len()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l as usize >= classes) {
            return Err(Error::Domain(format!("label {l} outside [0, {classes})")));
        }
        Ok(Self {
            features,
            labels,
            n,
            m,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn features_dim(&self) -> usize {
        self.m
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.features[i * self.m..(i + 1) * self.m]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// First `n` samples (or all of them if there are fewer).
    pub fn take(mut self, n: usize) -> Self {
        let n = n.clamp(1, self.n);
        self.features.truncate(n * self.m);
        self.labels.truncate(n);
        self.n = n;
        self
    }
}

fn read_u32(buf: &[u8], offset: usize, what: &str) -> Result<u32> {
    buf.get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format {
            offset: offset as u64,
            msg: format!("file truncated while reading {what}"),
        })
}

fn expect_magic(buf: &[u8], magic: u32) -> Result<()> {
    let got = read_u32(buf, 0, "magic number")?;
    if got != magic {
        return Err(Error::Format {
            offset: 0,
            msg: format!("bad magic 0x{got:08x}, expected 0x{magic:08x}"),
        });
    }
    Ok(())
}

/// Parses an IDX label file image (`0x00000801`, count, bytes).
pub fn parse_idx_labels(buf: &[u8]) -> Result<Vec<u32>> {
    expect_magic(buf, IDX_LABELS_MAGIC)?;
    let n = read_u32(buf, 4, "label count")? as usize;
    let body = buf.get(8..8 + n).ok_or_else(|| Error::Format {
        offset: buf.len() as u64,
        msg: format!("expected {n} label bytes after the header, file has {}", buf.len().saturating_sub(8)),
    })?;
    Ok(body.iter().map(|&b| b as u32).collect())
}

/// Parses an IDX image file (`0x00000803`, n, rows, cols, pixels); returns
/// `(n, rows * cols, pixels / 255)`.
pub fn parse_idx_images(buf: &[u8]) -> Result<(usize, usize, Vec<f32>)> {
    expect_magic(buf, IDX_IMAGES_MAGIC)?;
    let n = read_u32(buf, 4, "image count")? as usize;
    let rows = read_u32(buf, 8, "row count")? as usize;
    let cols = read_u32(buf, 12, "column count")? as usize;
    let m = rows * cols;
    let body = buf.get(16..16 + n * m).ok_or_else(|| Error::Format {
        offset: buf.len() as u64,
        msg: format!(
            "expected {} pixel bytes after the header, file has {}",
            n * m,
            buf.len().saturating_sub(16)
        ),
    })?;
    Ok((n, m, body.iter().map(|&b| b as f32 / 255.0).collect()))
}

/// Loads an images/labels IDX pair. Pixels are scaled to `[0, 1]`; the
/// class count is `max(label) + 1`.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let images = std::fs::read(images_path).map_err(|e| Error::io(images_path, e))?;
    let labels = std::fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;
    let labels = parse_idx_labels(&labels)?;
    let (n, m, features) = parse_idx_images(&images)?;
    if n != labels.len() {
        return Err(Error::Format {
            offset: 4,
            msg: format!("{n} images but {} labels", labels.len()),
        });
    }
    let classes = labels.iter().max().map_or(1, |&l| l as usize + 1);
    Dataset::new(features, labels, m, classes)
}

/// Gaussian class-conditional data: `x = mean[label] + N(0, I)`.
///
/// Class means have i.i.d. `N(0, SYNTH_SEPARATION^2 / (2m))` coordinates, so
/// any two means are about `SYNTH_SEPARATION` apart regardless of `m`.
/// Labels are uniform over classes. Deterministic in `seed`.
pub fn synth_dataset(seed: u64, n: usize, m: usize, classes: usize) -> Result<Dataset> {
    synth_dataset_with(seed, n, m, classes, SYNTH_SEPARATION)
}

/// [`synth_dataset`] with an explicit mean separation.
pub fn synth_dataset_with(seed: u64, n: usize, m: usize, classes: usize, separation: f64) -> Result<Dataset> {
    if n == 0 || m == 0 || classes == 0 {
        return Err(Error::Dimension("synthetic dataset needs n, m, C >= 1".into()));
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(Error::Domain(format!("separation {separation} must be finite and >= 0")));
    }
    let mut rng = rng::stream(seed, purpose::SYNTH, 1);
    let scale = separation / (2.0 * m as f64).sqrt();
    let means: Vec<f64> = (0..classes * m)
        .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, &mut rng))
        .collect();
    let mut features = Vec::with_capacity(n * m);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let c = rng.random_range(0..classes as u32);
        let mean = &means[c as usize * m..(c as usize + 1) * m];
        for &mu in mean {
            let z: f64 = StandardNormal.sample(&mut rng);
            features.push((mu + z) as f32);
        }
        labels.push(c);
    }
    Dataset::new(features, labels, m, classes)
}

/// Seeded permutation of `0..n` for one epoch.
pub fn epoch_permutation(seed: u64, epoch: usize, n: usize) -> Vec<usize> {
    let mut rng = rng::stream(seed, purpose::SHUFFLE, epoch as u64);
    rng::sample_without_replacement(&mut rng, n, n)
}
