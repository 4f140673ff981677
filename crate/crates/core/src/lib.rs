//! Gradient sparsification toolkit.
//!
//! * [`compress`]: exact top-k, random-k, Gaussian-threshold, sampled (DGC)
//!   and trimmed-threshold operators behind one [`compress::CompressorSpec`].
//! * [`ef`] and [`train`]: error-feedback data-parallel SGD with simulated
//!   workers.
//! * [`analysis`]: top-k error ratios against the `1 - k/d` and
//!   `(1 - k/d)^2` bounds, sorted-magnitude shape checks, histograms and
//!   Monte Carlo checks of random-k.
//! * [`bench`]: wall-clock and pass-count comparison of the operators.

pub mod analysis;
pub mod bench;
pub mod compress;
pub mod data;
pub mod ef;
pub mod error;
pub mod model;
pub mod quantile;
pub mod report;
pub mod rng;
pub mod train;
pub mod vector;

pub use compress::{compress, CompressorKind, CompressorSpec, KSpec, PassCounter};
pub use error::{Error, Result};
pub use vector::{densify, sorted_pi, vector_stats, DenseGrad, SparseSelection, VecStats};
