//! Document-to-class distance features.
//!
//! Every class gets a representative vector: the element-wise sum of the
//! training rows carrying that label. A document is then mapped to the
//! k-vector of its distances to the k representatives, so the output width
//! is the number of classes whatever the vocabulary size.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseVector;
use crate::vectorizer::CorpusMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Cosine,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" | "e" => Ok(Metric::Euclidean),
            "cosine" | "c" => Ok(Metric::Cosine),
            other => Err(Error::Config(format!("unknown metric `{other}`"))),
        }
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            actual: b,
        });
    }
    Ok(())
}

pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a.len(), b.len())?;
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// `1 - cos(a, b)`, clamped to `[0, 2]`. Defined as 1 when either vector is
/// all zeros.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a.len(), b.len())?;
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    Ok(cosine_from_parts(dot, na, nb))
}

pub(crate) fn cosine_from_parts(dot: f64, norm_a: f64, norm_b: f64) -> f64 {
    if norm_a == 0.0 || norm_b == 0.0 {
        return 1.0;
    }
    (1.0 - dot / (norm_a * norm_b)).clamp(0.0, 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRepresentative {
    pub class_id: usize,
    pub vector: Vec<f64>,
}

/// The k class representatives of one training matrix, with cached norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Representatives {
    reps: Vec<ClassRepresentative>,
    sq_norms: Vec<f64>,
    dim: usize,
}

impl Representatives {
    pub fn from_vectors(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        for v in &vectors {
            check_dims(dim, v.len())?;
        }
        let sq_norms = vectors
            .iter()
            .map(|v| v.iter().map(|x| x * x).sum())
            .collect();
        let reps = vectors
            .into_iter()
            .enumerate()
            .map(|(class_id, vector)| ClassRepresentative { class_id, vector })
            .collect();
        Ok(Representatives {
            reps,
            sq_norms,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, class: usize) -> &ClassRepresentative {
        &self.reps[class]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ClassRepresentative> {
        self.reps.iter()
    }

    /// Distance from a sparse row to the representative of `class`.
    ///
    /// Euclidean distances expand `|r|^2 + sum_j ((v_j - r_j)^2 - r_j^2)` over
    /// the stored entries of `v` only; when that expansion is small relative
    /// to `|r|^2` the distance is recomputed densely to avoid cancellation.
    pub fn distance(&self, row: &SparseVector, class: usize, metric: Metric) -> f64 {
        let r = &self.reps[class].vector;
        let rn = self.sq_norms[class];
        match metric {
            Metric::Euclidean => {
                let mut acc = rn;
                for (j, v) in row.iter() {
                    let d = v - r[j];
                    acc += d * d - r[j] * r[j];
                }
                if acc <= 1e-9 * rn.max(f64::MIN_POSITIVE) {
                    acc = dense_sq_dist(row, r);
                }
                acc.max(0.0).sqrt()
            }
            Metric::Cosine => cosine_from_parts(row.dot_dense(r), row.sq_norm().sqrt(), rn.sqrt()),
        }
    }
}

fn dense_sq_dist(row: &SparseVector, r: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut next = row.iter().peekable();
    for (j, rj) in r.iter().enumerate() {
        let v = match next.peek() {
            Some(&(i, v)) if i == j => {
                next.next();
                v
            }
            _ => 0.0,
        };
        acc += (v - rj) * (v - rj);
    }
    acc
}

/// Sums the training rows of each class.
///
/// Contributions to every (class, column) cell are added in ascending value
/// order, so the result does not depend on the order of the rows.
pub fn build_representatives(
    train: &CorpusMatrix,
    class_names: &[String],
) -> Result<Representatives> {
    let k = class_names.len();
    let mut counts = vec![0usize; k];
    let mut cells: Vec<(usize, usize, f64)> = Vec::new();
    for (row, &label) in train.rows.iter().zip(&train.labels) {
        if label >= k {
            return Err(Error::Invariant(format!(
                "label {label} outside {k} classes"
            )));
        }
        counts[label] += 1;
        if let Some(j) = row.indices().last() {
            check_dims(train.dim.max(*j + 1), train.dim)?;
        }
        cells.extend(row.iter().map(|(j, w)| (label, j, w)));
    }
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::EmptyClass(class_names[c].clone()));
    }
    cells.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
    let mut vectors = vec![vec![0.0; train.dim]; k];
    for (c, j, w) in cells {
        vectors[c][j] += w;
    }
    Representatives::from_vectors(vectors)
}

/// The k-dimensional distance representation of a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcdFeatures {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub metric: Metric,
}

impl DcdFeatures {
    pub fn width(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Per-row index of the closest representative, ties to the lower class.
    pub fn argmin(&self) -> Vec<usize> {
        self.rows.iter().map(|r| argmin(r)).collect()
    }
}

pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

pub fn transform(
    matrix: &CorpusMatrix,
    reps: &Representatives,
    metric: Metric,
) -> Result<DcdFeatures> {
    check_dims(reps.dim(), matrix.dim)?;
    let rows = matrix
        .rows
        .par_iter()
        .map(|row| {
            (0..reps.len())
                .map(|c| reps.distance(row, c, metric))
                .collect()
        })
        .collect();
    Ok(DcdFeatures {
        rows,
        labels: matrix.labels.clone(),
        metric,
    })
}
