//! Sparse and dense row primitives shared by the vectorizer, the
//! distance transform and the classifiers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sparse row with strictly increasing indices and strictly positive
/// stored weights.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn new() -> Self {
        SparseVector::default()
    }

    /// Builds a vector from `(index, weight)` pairs. Pairs are sorted, zero
    /// weights dropped; duplicate indices or negative/non-finite weights are
    /// rejected.
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Result<Self> {
        pairs.sort_by_key(|p| p.0);
        let mut v = SparseVector::default();
        for (j, w) in pairs {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Invariant(format!("weight {w} at index {j}")));
            }
            if v.indices.last() == Some(&j) {
                return Err(Error::Invariant(format!("duplicate index {j}")));
            }
            if w > 0.0 {
                v.indices.push(j);
                v.values.push(w);
            }
        }
        Ok(v)
    }

    pub fn from_dense(dense: &[f64]) -> Result<Self> {
        Self::from_pairs(dense.iter().copied().enumerate().collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    pub fn get(&self, j: usize) -> f64 {
        match self.indices.binary_search(&j) {
            Ok(p) => self.values[p],
            Err(_) => 0.0,
        }
    }

    /// One past the largest stored index.
    pub fn min_dim(&self) -> usize {
        self.indices.last().map_or(0, |&j| j + 1)
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (j, w) in self.iter() {
            out[j] = w;
        }
        out
    }

    pub fn scaled(&self, c: f64) -> SparseVector {
        SparseVector {
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn sq_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(j, w)| w * dense[j]).sum()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b, mut acc) = (0, 0, 0.0);
        while a < self.nnz() && b < other.nnz() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }

    /// Squared euclidean distance, merging both supports.
    pub fn sq_dist(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b, mut acc) = (0, 0, 0.0);
        while a < self.nnz() || b < other.nnz() {
            let ia = self.indices.get(a).copied().unwrap_or(usize::MAX);
            let ib = other.indices.get(b).copied().unwrap_or(usize::MAX);
            let d = if ia < ib {
                a += 1;
                self.values[a - 1]
            } else if ib < ia {
                b += 1;
                other.values[b - 1]
            } else {
                a += 1;
                b += 1;
                self.values[a - 1] - other.values[b - 1]
            };
            acc += d * d;
        }
        acc
    }
}

/// Rows the classifiers can compare.
pub trait FeatureRow: Sync {
    /// Width implied by the row itself (sparse rows report a lower bound).
    fn width(&self) -> usize;
    fn sq_norm(&self) -> f64;
    fn dot(&self, other: &Self) -> f64;
    fn sq_dist(&self, other: &Self) -> f64;
    fn is_sparse() -> bool;
}

impl FeatureRow for SparseVector {
    fn width(&self) -> usize {
        self.min_dim()
    }
    fn sq_norm(&self) -> f64 {
        SparseVector::sq_norm(self)
    }
    fn dot(&self, other: &Self) -> f64 {
        SparseVector::dot(self, other)
    }
    fn sq_dist(&self, other: &Self) -> f64 {
        SparseVector::sq_dist(self, other)
    }
    fn is_sparse() -> bool {
        true
    }
}

impl FeatureRow for Vec<f64> {
    fn width(&self) -> usize {
        self.len()
    }
    fn sq_norm(&self) -> f64 {
        self.iter().map(|v| v * v).sum()
    }
    fn dot(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| a * b).sum()
    }
    fn sq_dist(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| (a - b) * (a - b)).sum()
    }
    fn is_sparse() -> bool {
        false
    }
}
