//! Filter feature selection baselines.
//!
//! All scorers work on document-level term presence counted over the
//! training portion. Global scorers (information gain, chi-squared) rank
//! every feature once; the local odds-ratio scorer ranks it per class and
//! is used to attach a class to each feature for the class-quota selectors
//! IGFSS (equal quota per class) and VGFSS (quota proportional to class
//! size).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseVector;
use crate::vectorizer::CorpusMatrix;

/// Per (term, class) document counts.
///
/// `n11`: docs of the class containing the term; `n10`: docs of other
/// classes containing it; `n01`: docs of the class without it; `n00`: the
/// rest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyCounts {
    n_docs: usize,
    class_sizes: Vec<usize>,
    // n_terms x n_classes, row major
    in_class: Vec<usize>,
    term_df: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cells {
    pub n11: usize,
    pub n10: usize,
    pub n01: usize,
    pub n00: usize,
}

impl Cells {
    pub fn n(&self) -> usize {
        self.n11 + self.n10 + self.n01 + self.n00
    }
}

impl ContingencyCounts {
    /// Counts from per-document presence lists (column indices of the terms
    /// present in each document).
    pub fn from_presence<P: AsRef<[usize]>>(
        presence: &[P],
        labels: &[usize],
        n_terms: usize,
        n_classes: usize,
    ) -> Self {
        assert_eq!(presence.len(), labels.len(), "labels aligned with rows");
        let mut class_sizes = vec![0; n_classes];
        let mut in_class = vec![0; n_terms * n_classes];
        let mut term_df = vec![0; n_terms];
        for (cols, &c) in presence.iter().zip(labels) {
            class_sizes[c] += 1;
            for &t in cols.as_ref() {
                in_class[t * n_classes + c] += 1;
                term_df[t] += 1;
            }
        }
        ContingencyCounts {
            n_docs: labels.len(),
            class_sizes,
            in_class,
            term_df,
        }
    }

    /// Counts from the stored entries of a matrix.
    pub fn from_matrix(matrix: &CorpusMatrix, n_classes: usize) -> Self {
        let presence: Vec<&[usize]> = matrix.rows.iter().map(SparseVector::indices).collect();
        Self::from_presence(&presence, &matrix.labels, matrix.dim, n_classes)
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn n_terms(&self) -> usize {
        self.term_df.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn cells(&self, term: usize, class: usize) -> Cells {
        let n11 = self.in_class[term * self.n_classes() + class];
        let n10 = self.term_df[term] - n11;
        let n01 = self.class_sizes[class] - n11;
        let n00 = self.n_docs - n11 - n10 - n01;
        Cells { n11, n10, n01, n00 }
    }
}

/// Feature scores and the order they induce: descending score, ties by
/// ascending index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub scores: Vec<f64>,
    pub order: Vec<usize>,
}

impl FeatureRanking {
    pub fn from_scores(scores: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        FeatureRanking { scores, order }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn top(&self, n: usize) -> Result<FeatureMask> {
        check_budget(n, self.len())?;
        FeatureMask::new(self.order[..n].to_vec(), self.len())
    }
}

fn check_budget(requested: usize, available: usize) -> Result<()> {
    if requested > available {
        return Err(Error::Budget {
            requested,
            available,
        });
    }
    Ok(())
}

/// Selected columns, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMask {
    selected: Vec<usize>,
    dim: usize,
}

impl FeatureMask {
    pub fn new(mut selected: Vec<usize>, dim: usize) -> Result<Self> {
        selected.sort_unstable();
        let len = selected.len();
        selected.dedup();
        if selected.len() != len {
            return Err(Error::Invariant("duplicate feature in mask".into()));
        }
        if let Some(&j) = selected.last() {
            if j >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: j + 1,
                });
            }
        }
        Ok(FeatureMask { selected, dim })
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

fn xlogx_entropy(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.ln()
        })
        .sum()
}

/// Information gain of every term, in nats:
/// `H(C) - P(t) H(C | t) - P(!t) H(C | !t)`.
pub fn information_gain(counts: &ContingencyCounts) -> FeatureRanking {
    let n = counts.n_docs() as f64;
    let k = counts.n_classes();
    let sizes: Vec<f64> = counts.class_sizes().iter().map(|&s| s as f64).collect();
    let h_c = xlogx_entropy(&sizes, n);
    let scores = (0..counts.n_terms())
        .map(|t| {
            let present: Vec<f64> = (0..k).map(|c| counts.cells(t, c).n11 as f64).collect();
            let absent: Vec<f64> = (0..k).map(|c| counts.cells(t, c).n01 as f64).collect();
            let np: f64 = present.iter().sum();
            let na = n - np;
            let ig = h_c
                - (np / n) * xlogx_entropy(&present, np)
                - (na / n) * xlogx_entropy(&absent, na);
            ig.max(0.0)
        })
        .collect();
    FeatureRanking::from_scores(scores)
}

pub fn chi_squared_cell(cells: Cells) -> f64 {
    let (a, b, c, d) = (
        cells.n11 as f64,
        cells.n10 as f64,
        cells.n01 as f64,
        cells.n00 as f64,
    );
    let denom = (a + c) * (b + d) * (a + b) * (c + d);
    if denom == 0.0 {
        return 0.0;
    }
    let n = a + b + c + d;
    n * (a * d - b * c).powi(2) / denom
}

/// Chi-squared per (term, class); the global score of a term is its maximum
/// over classes.
pub fn chi_squared(counts: &ContingencyCounts) -> FeatureRanking {
    let scores = (0..counts.n_terms())
        .map(|t| {
            (0..counts.n_classes())
                .map(|c| chi_squared_cell(counts.cells(t, c)))
                .fold(0.0, f64::max)
        })
        .collect();
    FeatureRanking::from_scores(scores)
}

/// Log odds ratio with 0.5 added to every cell.
pub fn odds_ratio_cell(cells: Cells) -> f64 {
    let s = |x: usize| x as f64 + 0.5;
    ((s(cells.n11) * s(cells.n00)) / (s(cells.n10) * s(cells.n01))).ln()
}

pub fn odds_ratio(counts: &ContingencyCounts, class: usize) -> Vec<f64> {
    (0..counts.n_terms())
        .map(|t| odds_ratio_cell(counts.cells(t, class)))
        .collect()
}

/// For each feature, the class with the highest local score (ties to the
/// lowest class index). `local[c][t]` is the score of term `t` for class `c`.
pub fn assign_feature_class(local: &[Vec<f64>]) -> Vec<usize> {
    let n_terms = local.first().map_or(0, Vec::len);
    (0..n_terms)
        .map(|t| {
            let mut best = 0;
            for c in 1..local.len() {
                if local[c][t] > local[best][t] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Walks the ranking taking a feature while its class quota is open, then
/// fills any shortfall with the best remaining features of any class.
fn quota_walk(
    ranking: &FeatureRanking,
    feature_class: &[usize],
    quotas: &[usize],
    n_sel: usize,
) -> Result<FeatureMask> {
    check_budget(n_sel, ranking.len())?;
    let mut taken = vec![0usize; quotas.len()];
    let mut chosen = vec![false; ranking.len()];
    let mut selected = Vec::with_capacity(n_sel);
    for &t in &ranking.order {
        if selected.len() == n_sel {
            break;
        }
        let c = feature_class[t];
        if taken[c] < quotas[c] {
            taken[c] += 1;
            chosen[t] = true;
            selected.push(t);
        }
    }
    for &t in &ranking.order {
        if selected.len() == n_sel {
            break;
        }
        if !chosen[t] {
            chosen[t] = true;
            selected.push(t);
        }
    }
    FeatureMask::new(selected, ranking.len())
}

/// Equal quota `ceil(n_sel / k)` per class.
pub fn igfss_select(
    ranking: &FeatureRanking,
    feature_class: &[usize],
    n_sel: usize,
    k: usize,
) -> Result<FeatureMask> {
    if k == 0 {
        return Err(Error::Config("igfss needs at least one class".into()));
    }
    let q = n_sel.div_ceil(k);
    quota_walk(ranking, feature_class, &vec![q; k], n_sel)
}

/// Quotas proportional to class sizes, apportioned by largest remainder so
/// they sum to `n_sel` exactly (remainder ties go to the lower class index).
pub fn vgfss_quotas(n_sel: usize, class_sizes: &[usize]) -> Vec<usize> {
    let total: usize = class_sizes.iter().sum();
    if total == 0 {
        return vec![0; class_sizes.len()];
    }
    let mut quotas: Vec<usize> = class_sizes.iter().map(|&s| n_sel * s / total).collect();
    let mut rems: Vec<(usize, usize)> = class_sizes
        .iter()
        .enumerate()
        .map(|(c, &s)| (n_sel * s % total, c))
        .collect();
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let short = n_sel - quotas.iter().sum::<usize>();
    for &(_, c) in rems.iter().take(short) {
        quotas[c] += 1;
    }
    quotas
}

pub fn vgfss_select(
    ranking: &FeatureRanking,
    feature_class: &[usize],
    n_sel: usize,
    class_sizes: &[usize],
) -> Result<FeatureMask> {
    quota_walk(
        ranking,
        feature_class,
        &vgfss_quotas(n_sel, class_sizes),
        n_sel,
    )
}

/// Keeps the masked columns, re-indexed densely in their original order.
pub fn apply_mask(matrix: &CorpusMatrix, mask: &FeatureMask) -> Result<CorpusMatrix> {
    if mask.dim != matrix.dim {
        return Err(Error::DimensionMismatch {
            expected: matrix.dim,
            actual: mask.dim,
        });
    }
    let mut remap = vec![usize::MAX; matrix.dim];
    for (new, &old) in mask.selected.iter().enumerate() {
        remap[old] = new;
    }
    let rows = matrix
        .rows
        .iter()
        .map(|r| {
            let pairs = r
                .iter()
                .filter(|&(j, _)| remap[j] != usize::MAX)
                .map(|(j, w)| (remap[j], w))
                .collect();
            SparseVector::from_pairs(pairs)
        })
        .collect::<Result<Vec<_>>>()?;
    CorpusMatrix::new(rows, matrix.labels.clone(), mask.len())
}

/// Global scorer used to rank features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlobalScorer {
    Ig,
    Chi2,
}

impl GlobalScorer {
    pub fn rank(self, counts: &ContingencyCounts) -> FeatureRanking {
        match self {
            GlobalScorer::Ig => information_gain(counts),
            GlobalScorer::Chi2 => chi_squared(counts),
        }
    }
}

impl fmt::Display for GlobalScorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GlobalScorer::Ig => "ig",
            GlobalScorer::Chi2 => "chi2",
        })
    }
}

impl FromStr for GlobalScorer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ig" => Ok(GlobalScorer::Ig),
            "chi2" => Ok(GlobalScorer::Chi2),
            other => Err(Error::Config(format!("unknown global scorer `{other}`"))),
        }
    }
}

/// Feature classes from odds ratio, the local scorer of the ensemble
/// selectors.
pub fn odds_ratio_classes(counts: &ContingencyCounts) -> Vec<usize> {
    let local: Vec<Vec<f64>> = (0..counts.n_classes())
        .map(|c| odds_ratio(counts, c))
        .collect();
    assign_feature_class(&local)
}
