//! Cross-validated experiment runner, metrics and reports.
//!
//! Each fold preprocesses, fits the vocabulary, document frequencies,
//! feature scores and class representatives on its training portion only,
//! transforms both portions, trains the classifier and scores the test
//! portion. Folds run concurrently; the report is assembled in fold order.

use std::collections::HashSet;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{centroid_predict, knn_predict, KnnModel, DEFAULT_K};
use crate::corpus::{
    load_directory_corpus, load_newsgroups, load_reuters_sgml, load_tsv_corpus, shuffled_kfold,
    stratified_kfold, write_fold_assignments, FoldSplit, LabeledCorpus, DEFAULT_SEED,
};
use crate::dcdistance::{self, build_representatives, DcdFeatures, Metric, Representatives};
use crate::error::{Error, Result};
use crate::featselect::{
    apply_mask, igfss_select, odds_ratio_classes, vgfss_select, ContingencyCounts, FeatureMask,
    FeatureRanking, GlobalScorer,
};
use crate::io;
use crate::sparse::SparseVector;
use crate::synthetic::{self, SyntheticConfig};
use crate::textprep::{tokenize, Preprocessor, Stoplist};
use crate::vectorizer::{CorpusMatrix, Vocabulary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CorpusSource {
    Dir { path: PathBuf },
    Tsv { path: PathBuf },
    Reuters { path: PathBuf },
    Newsgroups { path: PathBuf },
    Synthetic(SyntheticConfig),
}

impl CorpusSource {
    pub fn load(&self) -> Result<LabeledCorpus> {
        match self {
            CorpusSource::Dir { path } => load_directory_corpus(path),
            CorpusSource::Tsv { path } => load_tsv_corpus(path),
            CorpusSource::Reuters { path } => load_reuters_sgml(path),
            CorpusSource::Newsgroups { path } => load_newsgroups(path),
            CorpusSource::Synthetic(cfg) => synthetic::generate(cfg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    None,
    DcdEuclidean,
    DcdCosine,
    Ig,
    Chi2,
    Igfss,
    Vgfss,
}

impl Transform {
    pub const ALL: [Transform; 7] = [
        Transform::None,
        Transform::DcdEuclidean,
        Transform::DcdCosine,
        Transform::Ig,
        Transform::Chi2,
        Transform::Igfss,
        Transform::Vgfss,
    ];

    pub fn dcd_metric(self) -> Option<Metric> {
        match self {
            Transform::DcdEuclidean => Some(Metric::Euclidean),
            Transform::DcdCosine => Some(Metric::Cosine),
            _ => None,
        }
    }

    pub fn is_selection(self) -> bool {
        matches!(
            self,
            Transform::Ig | Transform::Chi2 | Transform::Igfss | Transform::Vgfss
        )
    }

    /// Short label for report tables.
    pub fn label(self) -> &'static str {
        match self {
            Transform::None => "Orig",
            Transform::DcdEuclidean => "DCD.E",
            Transform::DcdCosine => "DCD.C",
            Transform::Ig => "IG",
            Transform::Chi2 => "CHI2",
            Transform::Igfss => "IGFSS",
            Transform::Vgfss => "VGFSS",
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transform::None => "none",
            Transform::DcdEuclidean => "dcd-euclidean",
            Transform::DcdCosine => "dcd-cosine",
            Transform::Ig => "ig",
            Transform::Chi2 => "chi2",
            Transform::Igfss => "igfss",
            Transform::Vgfss => "vgfss",
        })
    }
}

impl FromStr for Transform {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Transform::ALL
            .into_iter()
            .find(|t| t.to_string() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown transform `{s}` (expected one of none, dcd-euclidean, dcd-cosine, ig, chi2, igfss, vgfss)"
                ))
            })
    }
}

/// Number of features a selector keeps: the class count, or a fraction of
/// the fold's vocabulary size rounded to the nearest integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BudgetRepr", into = "String")]
pub enum Budget {
    MatchK,
    Fraction(f64),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BudgetRepr {
    Num(f64),
    Str(String),
}

impl TryFrom<BudgetRepr> for Budget {
    type Error = Error;
    fn try_from(r: BudgetRepr) -> Result<Self> {
        match r {
            BudgetRepr::Num(f) => Budget::fraction(f),
            BudgetRepr::Str(s) => s.parse(),
        }
    }
}

impl From<Budget> for String {
    fn from(b: Budget) -> String {
        b.to_string()
    }
}

impl Budget {
    pub fn fraction(f: f64) -> Result<Self> {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::Config(format!(
                "budget fraction must be in (0, 1], got {f}"
            )));
        }
        Ok(Budget::Fraction(f))
    }

    /// Selected feature count for `d` candidate features and `k` classes.
    pub fn resolve(self, d: usize, k: usize) -> Result<usize> {
        let n = match self {
            Budget::MatchK => k,
            Budget::Fraction(f) => ((f * d as f64).round() as usize).max(1),
        };
        if n > d {
            return Err(Error::Budget {
                requested: n,
                available: d,
            });
        }
        Ok(n)
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::MatchK => f.write_str("k"),
            Budget::Fraction(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Budget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k" | "match-k" => Ok(Budget::MatchK),
            _ => {
                let f: f64 = s.parse().map_err(|_| {
                    Error::Config(format!("budget must be `k` or a fraction, got `{s}`"))
                })?;
                Budget::fraction(f)
            }
        }
    }
}

/// `knn[:k[:metric]]` or `centroid[:metric]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ClassifierSpec {
    Knn { k: usize, metric: Metric },
    Centroid { metric: Metric },
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        ClassifierSpec::Knn {
            k: DEFAULT_K,
            metric: Metric::Euclidean,
        }
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierSpec::Knn {
                k,
                metric: Metric::Euclidean,
            } => write!(f, "knn:{k}"),
            ClassifierSpec::Knn { k, metric } => write!(f, "knn:{k}:{metric}"),
            ClassifierSpec::Centroid {
                metric: Metric::Euclidean,
            } => f.write_str("centroid"),
            ClassifierSpec::Centroid { metric } => write!(f, "centroid:{metric}"),
        }
    }
}

impl FromStr for ClassifierSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || {
            Error::Config(format!(
                "classifier must be knn[:k[:metric]] or centroid[:metric], got `{s}`"
            ))
        };
        match parts.as_slice() {
            ["knn", rest @ ..] if rest.len() <= 2 => {
                let k = match rest.first() {
                    Some(k) => k.parse().map_err(|_| bad())?,
                    None => DEFAULT_K,
                };
                if k == 0 {
                    return Err(bad());
                }
                let metric = rest.get(1).map_or(Ok(Metric::Euclidean), |m| m.parse())?;
                Ok(ClassifierSpec::Knn { k, metric })
            }
            ["centroid"] => Ok(ClassifierSpec::Centroid {
                metric: Metric::Euclidean,
            }),
            ["centroid", m] => Ok(ClassifierSpec::Centroid { metric: m.parse()? }),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for ClassifierSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ClassifierSpec> for String {
    fn from(c: ClassifierSpec) -> String {
        c.to_string()
    }
}

/// One experiment: corpus, preprocessing, transform, classifier, protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: CorpusSource,
    /// `smart`, `none`, or a path to a stoplist file.
    pub stoplist: String,
    pub stem: bool,
    pub min_df: usize,
    pub transform: Transform,
    pub budget: Budget,
    pub gfs: GlobalScorer,
    pub classifier: ClassifierSpec,
    pub folds: usize,
    pub seed: u64,
    pub stratify: bool,
    /// Overrides the raw word count used as the reduction denominator.
    pub raw_words: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: CorpusSource::Synthetic(SyntheticConfig::default()),
            stoplist: "smart".into(),
            stem: true,
            min_df: 1,
            transform: Transform::DcdEuclidean,
            budget: Budget::MatchK,
            gfs: GlobalScorer::Ig,
            classifier: ClassifierSpec::default(),
            folds: 10,
            seed: DEFAULT_SEED,
            stratify: true,
            raw_words: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config(format!(
                "folds must be >= 2, got {}",
                self.folds
            )));
        }
        if self.min_df == 0 {
            return Err(Error::Config("min_df must be >= 1".into()));
        }
        if let Budget::Fraction(f) = self.budget {
            Budget::fraction(f)?;
        }
        if self.raw_words == Some(0) {
            return Err(Error::Config("raw_words must be positive".into()));
        }
        Ok(())
    }

    pub fn preprocessor(&self) -> Result<Preprocessor> {
        let stoplist = match self.stoplist.as_str() {
            "smart" => Stoplist::smart(),
            "none" => Stoplist::empty(),
            path => Stoplist::load(path)?,
        };
        Ok(Preprocessor {
            stoplist,
            stem: self.stem,
        })
    }

    /// Table label, e.g. `DCD.E` or `IG@0.2`.
    pub fn technique(&self) -> String {
        if self.transform.is_selection() {
            format!("{}@{}", self.transform.label(), self.budget)
        } else {
            self.transform.label().to_string()
        }
    }
}

pub fn accuracy(golds: &[usize], preds: &[usize]) -> f64 {
    if golds.is_empty() {
        return 0.0;
    }
    let correct = golds.iter().zip(preds).filter(|(g, p)| g == p).count();
    correct as f64 / golds.len() as f64
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let p = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let r = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn confusion(golds: &[usize], preds: &[usize], n_classes: usize) -> Vec<(usize, usize, usize)> {
    let mut cells = vec![(0, 0, 0); n_classes];
    for (&g, &p) in golds.iter().zip(preds) {
        if g == p {
            cells[g].0 += 1;
        } else {
            cells[p].1 += 1;
            cells[g].2 += 1;
        }
    }
    cells
}

pub fn per_class_f1(golds: &[usize], preds: &[usize], n_classes: usize) -> Vec<f64> {
    confusion(golds, preds, n_classes)
        .into_iter()
        .map(|(tp, fp, fn_)| f1(tp, fp, fn_))
        .collect()
}

/// F1 of true positives, false positives and false negatives pooled over
/// all classes.
pub fn micro_f1(golds: &[usize], preds: &[usize], n_classes: usize) -> f64 {
    let (tp, fp, fn_) = confusion(golds, preds, n_classes)
        .into_iter()
        .fold((0, 0, 0), |a, c| (a.0 + c.0, a.1 + c.1, a.2 + c.2));
    f1(tp, fp, fn_)
}

pub fn macro_f1(golds: &[usize], preds: &[usize], n_classes: usize) -> f64 {
    if n_classes == 0 {
        return 0.0;
    }
    per_class_f1(golds, preds, n_classes).iter().sum::<f64>() / n_classes as f64
}

/// `100 * (1 - n_selected / n_raw_words)`.
pub fn reduction_pct(n_selected: f64, n_raw_words: usize) -> f64 {
    100.0 * (1.0 - n_selected / n_raw_words as f64)
}

/// Reduction as shown in tables: truncated (not rounded) to two decimals.
pub fn reduction_pct_2dp(pct: f64) -> f64 {
    ((pct * 100.0) + 1e-9).floor() / 100.0
}

/// Distinct words of the corpus before stopword removal and stemming.
pub fn raw_word_count(corpus: &LabeledCorpus) -> usize {
    let mut words = HashSet::new();
    for doc in corpus.docs() {
        words.extend(tokenize(&doc.text));
    }
    words.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation.
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len() as f64;
        if values.is_empty() {
            return Summary {
                mean: 0.0,
                std: 0.0,
            };
        }
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Summary { mean, std }
    }
}

/// The `n` terms with the largest positive entries of `representative`,
/// descending, ties by ascending column.
pub fn top_words(representative: &[f64], vocab: &Vocabulary, n: usize) -> Vec<String> {
    let mut cols: Vec<usize> = (0..representative.len())
        .filter(|&j| representative[j] > 0.0)
        .collect();
    cols.sort_by(|&a, &b| {
        representative[b]
            .total_cmp(&representative[a])
            .then(a.cmp(&b))
    });
    cols.into_iter()
        .take(n)
        .map(|j| vocab.term(j).to_string())
        .collect()
}

/// Top words of every class, with representatives fitted on the whole corpus.
pub fn class_top_words(
    corpus: &LabeledCorpus,
    config: &RunConfig,
    n: usize,
) -> Result<Vec<(String, Vec<String>)>> {
    let pre = config.preprocessor()?;
    let tokens: Vec<Vec<String>> = corpus
        .docs()
        .par_iter()
        .map(|d| pre.process(&d.text))
        .collect();
    let vocab = Vocabulary::fit_with_min_df(&tokens, config.min_df)?;
    let matrix = vocab.transform(&tokens, corpus.labels());
    let reps = build_representatives(&matrix, corpus.classes())?;
    Ok(reps
        .iter()
        .map(|r| {
            (
                corpus.classes()[r.class_id].clone(),
                top_words(&r.vector, &vocab, n),
            )
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScores {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    pub accuracy: f64,
    pub micro_f1: f64,
    pub macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub idf: String,
    pub representative: String,
    pub cosine: String,
    pub std: String,
    pub reduction_denominator: String,
    pub reduction_display: String,
    pub ensemble_selectors: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            idf: "raw count * ln(N / df), train folds only".into(),
            representative: "element-wise sum of training rows".into(),
            cosine: "features store 1 - cosine similarity".into(),
            std: "sample standard deviation over folds".into(),
            reduction_denominator: "distinct words before stopword removal and stemming".into(),
            reduction_display: "truncated to two decimals".into(),
            ensemble_selectors: "global scorer from `gfs`, local scorer odds ratio".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub provenance: Vec<String>,
    pub config: RunConfig,
    pub technique: String,
    pub classifier: String,
    pub n_docs: usize,
    pub classes: Vec<String>,
    pub raw_words: usize,
    pub folds: Vec<FoldScores>,
    pub accuracy: Summary,
    pub micro_f1: Summary,
    pub macro_f1: Summary,
    /// Mean selected feature count over folds.
    pub n_features: f64,
    pub reduction_pct: f64,
    /// `reduction_pct` truncated to two decimals, as printed in tables.
    pub reduction_pct_2dp: f64,
    pub conventions: Conventions,
    #[serde(skip)]
    pub elapsed_secs: f64,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Everything fitted on one fold's training portion, plus its predictions.
#[derive(Debug, Clone)]
pub struct FoldArtifacts {
    pub fold: usize,
    pub vocab: Vocabulary,
    pub representatives: Option<Representatives>,
    pub ranking: Option<FeatureRanking>,
    pub mask: Option<FeatureMask>,
    pub test_rows: Vec<usize>,
    pub predicted: Vec<usize>,
    pub scores: FoldScores,
}

impl FoldArtifacts {
    /// Serialized fitted state (vocabulary, document frequencies, scores,
    /// mask, representatives), excluding anything derived from test rows.
    pub fn fitted_fingerprint(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Fitted<'a> {
            vocab: &'a Vocabulary,
            representatives: &'a Option<Representatives>,
            ranking: &'a Option<FeatureRanking>,
            mask: &'a Option<FeatureMask>,
        }
        Ok(serde_json::to_string(&Fitted {
            vocab: &self.vocab,
            representatives: &self.representatives,
            ranking: &self.ranking,
            mask: &self.mask,
        })?)
    }
}

pub struct Experiment {
    pub corpus: LabeledCorpus,
    pub splits: Vec<FoldSplit>,
    pub artifacts: Vec<FoldArtifacts>,
    pub report: EvalReport,
}

enum Space {
    Sparse(CorpusMatrix, CorpusMatrix),
    Dense(DcdFeatures, DcdFeatures),
}

fn dense_to_matrix(f: &DcdFeatures) -> Result<CorpusMatrix> {
    let rows = f
        .rows
        .iter()
        .map(|r| SparseVector::from_dense(r))
        .collect::<Result<_>>()?;
    CorpusMatrix::new(rows, f.labels.clone(), f.width())
}

fn classify(space: &Space, spec: ClassifierSpec, classes: &[String]) -> Result<Vec<usize>> {
    let k_classes = classes.len();
    let preds = match (spec, space) {
        (ClassifierSpec::Knn { k, metric }, Space::Sparse(train, test)) => {
            let model = KnnModel::fit(
                train.rows.clone(),
                train.labels.clone(),
                k_classes,
                train.dim,
                k,
                metric,
            )?;
            knn_predict(&model, &test.rows)?
        }
        (ClassifierSpec::Knn { k, metric }, Space::Dense(train, test)) => {
            let model = KnnModel::fit(
                train.rows.clone(),
                train.labels.clone(),
                k_classes,
                k_classes,
                k,
                metric,
            )?;
            knn_predict(&model, &test.rows)?
        }
        (ClassifierSpec::Centroid { metric }, Space::Sparse(train, test)) => {
            let reps = build_representatives(train, classes)?;
            centroid_predict(&reps, &test.rows, metric)?
        }
        (ClassifierSpec::Centroid { metric }, Space::Dense(train, test)) => {
            let reps = build_representatives(&dense_to_matrix(train)?, classes)?;
            centroid_predict(&reps, &dense_to_matrix(test)?.rows, metric)?
        }
    };
    Ok(preds.into_iter().map(|p| p.predicted).collect())
}

fn run_fold(
    corpus: &LabeledCorpus,
    tokens: &[Vec<String>],
    split: &FoldSplit,
    config: &RunConfig,
) -> Result<FoldArtifacts> {
    let classes = corpus.classes();
    let k = classes.len();
    let labels = corpus.labels();
    let train_tokens: Vec<&[String]> = split.train.iter().map(|&i| tokens[i].as_slice()).collect();
    let test_tokens: Vec<&[String]> = split.test.iter().map(|&i| tokens[i].as_slice()).collect();
    let train_labels: Vec<usize> = split.train.iter().map(|&i| labels[i]).collect();
    let test_labels: Vec<usize> = split.test.iter().map(|&i| labels[i]).collect();

    let vocab = Vocabulary::fit_with_min_df(&train_tokens, config.min_df)?;
    let train = vocab.transform(&train_tokens, &train_labels);
    let test = vocab.transform(&test_tokens, &test_labels);

    let mut representatives = None;
    let mut ranking = None;
    let mut mask = None;
    let space = match config.transform {
        Transform::None => Space::Sparse(train, test),
        Transform::DcdEuclidean | Transform::DcdCosine => {
            let metric = config.transform.dcd_metric().expect("dcd transform");
            let reps = build_representatives(&train, classes)?;
            let tr = dcdistance::transform(&train, &reps, metric)?;
            let te = dcdistance::transform(&test, &reps, metric)?;
            representatives = Some(reps);
            Space::Dense(tr, te)
        }
        t => {
            let presence: Vec<Vec<usize>> =
                train_tokens.iter().map(|d| vocab.presence(d)).collect();
            let counts = ContingencyCounts::from_presence(&presence, &train_labels, vocab.len(), k);
            let n_sel = config.budget.resolve(vocab.len(), k)?;
            let (r, m) = match t {
                Transform::Ig | Transform::Chi2 => {
                    let scorer = if t == Transform::Ig {
                        GlobalScorer::Ig
                    } else {
                        GlobalScorer::Chi2
                    };
                    let r = scorer.rank(&counts);
                    let m = r.top(n_sel)?;
                    (r, m)
                }
                Transform::Igfss => {
                    let r = config.gfs.rank(&counts);
                    let m = igfss_select(&r, &odds_ratio_classes(&counts), n_sel, k)?;
                    (r, m)
                }
                _ => {
                    let r = config.gfs.rank(&counts);
                    let m = vgfss_select(
                        &r,
                        &odds_ratio_classes(&counts),
                        n_sel,
                        counts.class_sizes(),
                    )?;
                    (r, m)
                }
            };
            let space = Space::Sparse(apply_mask(&train, &m)?, apply_mask(&test, &m)?);
            ranking = Some(r);
            mask = Some(m);
            space
        }
    };
    let n_features = match &space {
        Space::Sparse(tr, _) => tr.dim,
        Space::Dense(tr, _) => tr.width(),
    };
    let predicted = classify(&space, config.classifier, classes)?;
    let acc = accuracy(&test_labels, &predicted);
    let micro = micro_f1(&test_labels, &predicted, k);
    if (micro - acc).abs() > 1e-12 {
        return Err(Error::Invariant(format!(
            "micro-F1 {micro} differs from accuracy {acc}"
        )));
    }
    Ok(FoldArtifacts {
        fold: split.fold_index,
        vocab,
        representatives,
        ranking,
        mask,
        test_rows: split.test.clone(),
        scores: FoldScores {
            fold: split.fold_index,
            n_train: split.train.len(),
            n_test: split.test.len(),
            n_features,
            accuracy: acc,
            micro_f1: micro,
            macro_f1: macro_f1(&test_labels, &predicted, k),
        },
        predicted,
    })
}

pub fn make_folds(corpus: &LabeledCorpus, config: &RunConfig) -> Result<Vec<FoldSplit>> {
    if config.stratify {
        stratified_kfold(corpus, config.folds, config.seed)
    } else {
        shuffled_kfold(corpus, config.folds, config.seed)
    }
}

pub fn run_experiment(config: &RunConfig) -> Result<Experiment> {
    config.validate()?;
    run_on_corpus(config.corpus.load()?, config)
}

/// Runs the configured experiment on an already loaded corpus.
pub fn run_on_corpus(corpus: LabeledCorpus, config: &RunConfig) -> Result<Experiment> {
    config.validate()?;
    let started = Instant::now();
    let pre = config.preprocessor()?;
    let tokens: Vec<Vec<String>> = corpus
        .docs()
        .par_iter()
        .map(|d| pre.process(&d.text))
        .collect();
    let splits = make_folds(&corpus, config)?;
    let artifacts = splits
        .par_iter()
        .map(|s| run_fold(&corpus, &tokens, s, config).map_err(|e| e.in_fold(s.fold_index)))
        .collect::<Result<Vec<_>>>()?;
    let raw_words = config.raw_words.unwrap_or_else(|| raw_word_count(&corpus));
    let folds: Vec<FoldScores> = artifacts.iter().map(|a| a.scores.clone()).collect();
    let collect = |f: fn(&FoldScores) -> f64| -> Vec<f64> { folds.iter().map(f).collect() };
    let n_features = folds.iter().map(|f| f.n_features as f64).sum::<f64>() / folds.len() as f64;
    let report = EvalReport {
        provenance: Vec::new(),
        config: config.clone(),
        technique: config.technique(),
        classifier: config.classifier.to_string(),
        n_docs: corpus.len(),
        classes: corpus.classes().to_vec(),
        raw_words,
        accuracy: Summary::of(&collect(|f| f.accuracy)),
        micro_f1: Summary::of(&collect(|f| f.micro_f1)),
        macro_f1: Summary::of(&collect(|f| f.macro_f1)),
        folds,
        n_features,
        reduction_pct: reduction_pct(n_features, raw_words),
        reduction_pct_2dp: reduction_pct_2dp(reduction_pct(n_features, raw_words)),
        conventions: Conventions::default(),
        elapsed_secs: started.elapsed().as_secs_f64(),
    };
    Ok(Experiment {
        corpus,
        splits,
        artifacts,
        report,
    })
}

fn pct(s: Summary) -> String {
    format!("{:.2}±{:.2}", 100.0 * s.mean, 100.0 * s.std)
}

fn fmt_features(n: f64) -> String {
    if n.fract() == 0.0 {
        format!("{n}")
    } else {
        format!("{n:.1}")
    }
}

/// Aligned table with one row per report: technique, classifier, accuracy,
/// micro-F1, macro-F1 (percent, mean±std), feature count and reduction.
pub fn format_table(reports: &[EvalReport], with_timing: bool) -> String {
    let mut header = vec![
        "Tech",
        "Classifier",
        "Acc(%)",
        "Micro-F1(%)",
        "Macro-F1(%)",
        "Feat.",
        "Red(%)",
    ];
    if with_timing {
        header.push("Time(s)");
    }
    let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for r in reports {
        let mut row = vec![
            r.technique.clone(),
            r.classifier.clone(),
            pct(r.accuracy),
            pct(r.micro_f1),
            pct(r.macro_f1),
            fmt_features(r.n_features),
            format!("{:.2}", reduction_pct_2dp(r.reduction_pct)),
        ];
        if with_timing {
            row.push(format!("{:.2}", r.elapsed_secs));
        }
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, &w))| {
                let pad = w - cell.chars().count();
                if c < 2 {
                    format!("{cell}{}", " ".repeat(pad))
                } else {
                    format!("{}{cell}", " ".repeat(pad))
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes `report.json`, `report.txt`, `folds.tsv` and one `fold-NN`
/// directory per fold (vocabulary, representatives, ranking, mask,
/// predictions). `provenance` lines head every artifact.
pub fn write_run_dir(exp: &Experiment, dir: &Path, provenance: &[String]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut report = exp.report.clone();
    report.provenance = provenance.to_vec();
    fs::write(dir.join("report.json"), report.to_json()?)?;
    let mut table = String::new();
    for line in provenance {
        table.push_str(&format!("# {line}\n"));
    }
    table.push_str(&format_table(std::slice::from_ref(&report), false));
    fs::write(dir.join("report.txt"), table)?;

    let mut out = create(&dir.join("folds.tsv"))?;
    for line in provenance {
        writeln!(out, "# {line}")?;
    }
    write_fold_assignments(&exp.corpus, &exp.splits, &mut out)?;
    out.flush()?;

    let classes = exp.corpus.classes();
    for a in &exp.artifacts {
        let fdir = dir.join(format!("fold-{:02}", a.fold));
        fs::create_dir_all(&fdir)?;
        let mut header = provenance.to_vec();
        header.push(format!("fold: {}", a.fold));
        io::write_vocabulary(&a.vocab, &header, create(&fdir.join("vocab.tsv"))?)?;
        if let Some(reps) = &a.representatives {
            io::write_representatives(
                reps,
                classes,
                &header,
                create(&fdir.join("representatives.tsv"))?,
            )?;
        }
        if let Some(r) = &a.ranking {
            io::write_ranking(r, &a.vocab, &header, create(&fdir.join("ranking.tsv"))?)?;
        }
        if let Some(m) = &a.mask {
            io::write_mask(m, &header, create(&fdir.join("mask.txt"))?)?;
        }
        io::write_predictions(
            &exp.corpus,
            &a.test_rows,
            &a.predicted,
            &header,
            create(&fdir.join("predictions.tsv"))?,
        )?;
    }
    Ok(())
}
