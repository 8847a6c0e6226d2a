//! Vocabulary fitting and TF-IDF bag-of-words matrices.
//!
//! `w(t, d) = f(t, d) * ln(N / df(t))` for terms present in `d`, with raw
//! term counts for `f` and document frequencies taken from the training
//! documents only. Terms that are not in the vocabulary are dropped.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseVector;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    n_docs: usize,
}

impl Vocabulary {
    /// Fits on training documents. Column order is first appearance.
    pub fn fit<D: AsRef<[String]>>(docs: &[D]) -> Result<Self> {
        Self::fit_with_min_df(docs, 1)
    }

    /// Like [`Vocabulary::fit`], keeping only terms found in at least
    /// `min_df` documents.
    pub fn fit_with_min_df<D: AsRef<[String]>>(docs: &[D], min_df: usize) -> Result<Self> {
        let mut order: Vec<&str> = Vec::new();
        let mut df: HashMap<&str, usize> = HashMap::new();
        for doc in docs {
            let mut seen: Vec<&str> = Vec::new();
            for t in doc.as_ref() {
                if !df.contains_key(t.as_str()) {
                    order.push(t.as_str());
                    df.insert(t.as_str(), 0);
                }
                seen.push(t.as_str());
            }
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *df.get_mut(t).unwrap() += 1;
            }
        }
        let order: Vec<&str> = order
            .into_iter()
            .filter(|t| df[t] >= min_df.max(1))
            .collect();
        if order.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let terms: Vec<String> = order.iter().map(|t| t.to_string()).collect();
        let doc_freq = order.iter().map(|t| df[t]).collect();
        Ok(Self::from_parts(terms, doc_freq, docs.len()))
    }

    pub(crate) fn from_parts(terms: Vec<String>, doc_freq: Vec<usize>, n_docs: usize) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            terms,
            index,
            doc_freq,
            n_docs,
        }
    }

    /// Rebuilds a vocabulary from serialized parts, validating its invariants.
    pub fn from_columns(terms: Vec<String>, doc_freq: Vec<usize>, n_docs: usize) -> Result<Self> {
        if terms.len() != doc_freq.len() {
            return Err(Error::Invariant(
                "terms and doc_freq differ in length".into(),
            ));
        }
        if let Some(bad) = doc_freq.iter().find(|&&df| df == 0 || df > n_docs) {
            return Err(Error::Invariant(format!(
                "doc_freq {bad} outside [1, {n_docs}]"
            )));
        }
        let v = Self::from_parts(terms, doc_freq, n_docs);
        if v.index.len() != v.terms.len() {
            return Err(Error::Invariant("duplicate vocabulary term".into()));
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, j: usize) -> &str {
        &self.terms[j]
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn idf(&self, j: usize) -> f64 {
        (self.n_docs as f64 / self.doc_freq[j] as f64).ln()
    }

    /// Sorted, deduplicated vocabulary columns of the terms in `tokens`.
    pub fn presence(&self, tokens: &[String]) -> Vec<usize> {
        let mut cols: Vec<usize> = tokens.iter().filter_map(|t| self.index_of(t)).collect();
        cols.sort_unstable();
        cols.dedup();
        cols
    }

    pub fn vectorize(&self, tokens: &[String]) -> SparseVector {
        self.vectorize_with_log_base(tokens, std::f64::consts::E)
    }

    /// TF-IDF with `log_base` for the IDF logarithm.
    pub fn vectorize_with_log_base(&self, tokens: &[String], log_base: f64) -> SparseVector {
        let mut counts: Vec<(usize, usize)> = Vec::new();
        let mut cols: Vec<usize> = tokens.iter().filter_map(|t| self.index_of(t)).collect();
        cols.sort_unstable();
        for j in cols {
            match counts.last_mut() {
                Some((last, n)) if *last == j => *n += 1,
                _ => counts.push((j, 1)),
            }
        }
        let natural = log_base == std::f64::consts::E;
        let scale = log_base.ln();
        let pairs = counts
            .into_iter()
            .map(|(j, n)| {
                let idf = if natural {
                    self.idf(j)
                } else {
                    self.idf(j) / scale
                };
                (j, n as f64 * idf)
            })
            .collect();
        SparseVector::from_pairs(pairs).expect("tf-idf weights are finite and non-negative")
    }

    pub fn transform<D: AsRef<[String]>>(&self, docs: &[D], labels: &[usize]) -> CorpusMatrix {
        self.transform_with_log_base(docs, labels, std::f64::consts::E)
    }

    pub fn transform_with_log_base<D: AsRef<[String]>>(
        &self,
        docs: &[D],
        labels: &[usize],
        log_base: f64,
    ) -> CorpusMatrix {
        assert_eq!(docs.len(), labels.len(), "one label per document");
        CorpusMatrix {
            rows: docs
                .iter()
                .map(|d| self.vectorize_with_log_base(d.as_ref(), log_base))
                .collect(),
            labels: labels.to_vec(),
            dim: self.len(),
        }
    }
}

/// One sparse row per document with its class index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMatrix {
    pub rows: Vec<SparseVector>,
    pub labels: Vec<usize>,
    pub dim: usize,
}

impl CorpusMatrix {
    pub fn new(rows: Vec<SparseVector>, labels: Vec<usize>, dim: usize) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Invariant(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(r) = rows.iter().find(|r| r.min_dim() > dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: r.min_dim(),
            });
        }
        Ok(CorpusMatrix { rows, labels, dim })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn scaled(&self, c: f64) -> CorpusMatrix {
        CorpusMatrix {
            rows: self.rows.iter().map(|r| r.scaled(c)).collect(),
            labels: self.labels.clone(),
            dim: self.dim,
        }
    }
}
