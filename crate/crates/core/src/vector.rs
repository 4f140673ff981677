//! Dense and sparse gradient vectors, summary statistics and order statistics.

use std::ops::Deref;

use crate::error::{Error, Result};

/// Flat gradient vector of dimension `d >= 1` with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrad {
    values: Vec<f64>,
}

impl DenseGrad {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("vector must have d >= 1".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "coordinate {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(Self { values })
    }

    pub fn zeros(d: usize) -> Result<Self> {
        Self::new(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty());
        Self { values }
    }
}

impl Deref for DenseGrad {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Sparse `(index, value)` selection out of a vector of dimension `d`.
///
/// Indices are strictly increasing and all below `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSelection {
    indices: Vec<usize>,
    values: Vec<f64>,
    dim: usize,
}

impl SparseSelection {
    pub fn new(indices: Vec<usize>, values: Vec<f64>, dim: usize) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::Structural(format!(
                "{} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Structural(format!(
                    "indices not strictly increasing at {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= dim {
                return Err(Error::Structural(format!("index {last} out of range for d = {dim}")));
            }
        }
        Ok(Self {
            indices,
            values,
            dim,
        })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            indices: Vec::new(),
            values: Vec::new(),
            dim,
        }
    }

    /// Gathers `u[i]` for the given (already sorted, unique) indices.
    pub(crate) fn gather(u: &[f64], indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        let values = indices.iter().map(|&i| u[i]).collect();
        Self {
            indices,
            values,
            dim: u.len(),
        }
    }

    /// Keeps every coordinate whose magnitude is strictly above `threshold`.
    pub(crate) fn above(u: &[f64], threshold: f64) -> Self {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (i, &v) in u.iter().enumerate() {
            if v.abs() > threshold {
                indices.push(i);
                values.push(v);
            }
        }
        Self {
            indices,
            values,
            dim: u.len(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Squared L2 norm of the selected values.
    pub fn l2_sq(&self) -> f64 {
        sum_squares(&self.values)
    }
}

/// Expands a selection into a dense vector with zeros off the support.
pub fn densify(s: &SparseSelection) -> Result<DenseGrad> {
    if s.dim == 0 {
        return Err(Error::Dimension("selection has d = 0".into()));
    }
    let mut out = vec![0.0; s.dim];
    let mut prev: Option<usize> = None;
    for (i, v) in s.iter() {
        if i >= s.dim {
            return Err(Error::Structural(format!("index {i} out of range for d = {}", s.dim)));
        }
        if prev.is_some_and(|p| p >= i) {
            return Err(Error::Structural(format!("duplicate or unsorted index {i}")));
        }
        prev = Some(i);
        out[i] = v;
    }
    Ok(DenseGrad::from_vec_unchecked(out))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VecStats {
    pub mean: f64,
    /// Population standard deviation (divides by `d`).
    pub std: f64,
    pub l2_sq: f64,
    pub linf: f64,
    pub dim: usize,
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn sum_squares(xs: &[f64]) -> f64 {
    let mut acc = CompensatedSum::default();
    for &x in xs {
        acc.add(x * x);
    }
    acc.value()
}

/// Mean, population std, squared L2 and max-abs in a single sweep.
///
/// Variance uses Welford's update; the sum of squares is compensated.
pub fn vector_stats(u: &[f64]) -> Result<VecStats> {
    if u.is_empty() {
        return Err(Error::Dimension("vector_stats on an empty vector".into()));
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut sq = CompensatedSum::default();
    let mut linf = 0.0f64;
    for (n, &x) in u.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (n + 1) as f64;
        m2 += delta * (x - mean);
        sq.add(x * x);
        linf = linf.max(x.abs());
    }
    let d = u.len();
    Ok(VecStats {
        mean,
        std: (m2 / d as f64).max(0.0).sqrt(),
        l2_sq: sq.value(),
        linf,
        dim: d,
    })
}

/// `|u| / ||u||_inf` sorted in descending order.
pub fn sorted_pi(u: &[f64]) -> Result<Vec<f64>> {
    let linf = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if u.is_empty() || linf == 0.0 {
        return Err(Error::Degenerate("sorted_pi needs ||u||_inf > 0".into()));
    }
    let mut pi: Vec<f64> = u.iter().map(|x| x.abs() / linf).collect();
    pi.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_of_zero_vector() {
        let s = vector_stats(&[0.0; 4]).unwrap();
        assert_eq!((s.mean, s.std, s.l2_sq, s.linf), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn stats_of_symmetric_pair() {
        let s = vector_stats(&[1.0, -1.0]).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.std, 1.0);
        assert_eq!(s.l2_sq, 2.0);
        assert_eq!(s.linf, 1.0);
    }

    #[test]
    fn stats_empty_is_dimension_error() {
        assert!(matches!(vector_stats(&[]), Err(Error::Dimension(_))));
    }

    #[test]
    fn dense_grad_rejects_non_finite() {
        assert!(DenseGrad::new(vec![1.0, f64::NAN]).is_err());
        assert!(DenseGrad::new(vec![f64::INFINITY]).is_err());
        assert!(DenseGrad::new(vec![]).is_err());
    }

    #[test]
    fn pi_basic() {
        assert_eq!(sorted_pi(&[2.0, -4.0, 1.0]).unwrap(), vec![1.0, 0.5, 0.25]);
        assert_eq!(sorted_pi(&[-3.0; 5]).unwrap(), vec![1.0; 5]);
        assert!(matches!(sorted_pi(&[0.0, 0.0]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn densify_cases() {
        let s = SparseSelection::new(vec![], vec![], 3).unwrap();
        assert_eq!(densify(&s).unwrap().as_slice(), &[0.0, 0.0, 0.0]);
        let s = SparseSelection::new(vec![1], vec![5.0], 3).unwrap();
        assert_eq!(densify(&s).unwrap().as_slice(), &[0.0, 5.0, 0.0]);
    }

    #[test]
    fn selection_rejects_bad_indices() {
        assert!(SparseSelection::new(vec![1, 1], vec![1.0, 2.0], 3).is_err());
        assert!(SparseSelection::new(vec![2, 1], vec![1.0, 2.0], 3).is_err());
        assert!(SparseSelection::new(vec![3], vec![1.0], 3).is_err());
        assert!(SparseSelection::new(vec![0], vec![], 3).is_err());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::default();
        acc.add(1e16);
        for _ in 0..1000 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.value(), 1000.0);
    }
}
