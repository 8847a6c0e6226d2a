use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use dcdistance::datasets;
use dcdistance::dcdistance::Metric;
use dcdistance::eval::{Budget, ClassifierSpec, CorpusSource, RunConfig, Transform};
use dcdistance::synthetic::SyntheticConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dataset {
    Reuters,
    #[value(name = "20ng")]
    Newsgroups,
    Synthetic,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Corpus laid out as one subdirectory per class.
    #[arg(long, conflicts_with_all = ["corpus_tsv", "dataset"])]
    pub corpus_dir: Option<PathBuf>,
    /// Corpus with one `label<TAB>text` record per line.
    #[arg(long, conflicts_with = "dataset")]
    pub corpus_tsv: Option<PathBuf>,
    /// Cached public dataset or the built-in synthetic corpus.
    #[arg(long, value_enum)]
    pub dataset: Option<Dataset>,
    /// Stoplist file, or `smart` / `none`.
    #[arg(long)]
    pub stoplist: Option<String>,
    /// Skip Porter stemming.
    #[arg(long)]
    pub no_stem: bool,
    /// none, dcd, dcd-euclidean, dcd-cosine, ig, chi2, igfss, vgfss.
    #[arg(long)]
    pub transform: Option<String>,
    /// Distance used by the dcd transform: euclidean or cosine.
    #[arg(long)]
    pub metric: Option<Metric>,
    /// Selection budget: `k` (number of classes) or a fraction in (0, 1].
    #[arg(long)]
    pub budget: Option<String>,
    /// knn[:k[:metric]] or centroid[:metric].
    #[arg(long)]
    pub classifier: Option<String>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Plain shuffled folds instead of stratified ones.
    #[arg(long)]
    pub no_stratify: bool,
    #[arg(long)]
    pub min_df: Option<usize>,
    /// Raw word count used as the reduction denominator.
    #[arg(long)]
    pub raw_words: Option<usize>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn load_config_file(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let mut cfg: RunConfig =
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    match &mut cfg.corpus {
        CorpusSource::Dir { path }
        | CorpusSource::Tsv { path }
        | CorpusSource::Reuters { path }
        | CorpusSource::Newsgroups { path } => *path = resolve(base, path),
        CorpusSource::Synthetic(_) => {}
    }
    if cfg.stoplist != "smart" && cfg.stoplist != "none" {
        cfg.stoplist = resolve(base, Path::new(&cfg.stoplist))
            .display()
            .to_string();
    }
    Ok(cfg)
}

pub fn dataset_source(d: Dataset) -> CorpusSource {
    let cache = datasets::cache_dir();
    match d {
        Dataset::Reuters => CorpusSource::Reuters {
            path: datasets::reuters_dir(&cache),
        },
        Dataset::Newsgroups => CorpusSource::Newsgroups {
            path: datasets::newsgroups_dir(&cache),
        },
        Dataset::Synthetic => CorpusSource::Synthetic(SyntheticConfig::default()),
    }
}

/// Parses a transform name, resolving bare `dcd` and applying `--metric`.
pub fn parse_transform(name: &str, metric: Option<Metric>) -> Result<Transform> {
    let t = if name == "dcd" {
        match metric.unwrap_or(Metric::Euclidean) {
            Metric::Euclidean => Transform::DcdEuclidean,
            Metric::Cosine => Transform::DcdCosine,
        }
    } else {
        name.parse::<Transform>()?
    };
    match (t.dcd_metric(), metric) {
        (Some(m), Some(want)) if m != want => {
            bail!("--metric {want} contradicts --transform {t}")
        }
        (None, Some(_)) => bail!("--metric applies only to dcd transforms, not `{t}`"),
        _ => Ok(t),
    }
}

impl CommonArgs {
    /// The config file (or defaults) with every given flag applied.
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_config_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.corpus_dir {
            cfg.corpus = CorpusSource::Dir { path: p.clone() };
        }
        if let Some(p) = &self.corpus_tsv {
            cfg.corpus = CorpusSource::Tsv { path: p.clone() };
        }
        if let Some(d) = self.dataset {
            cfg.corpus = dataset_source(d);
        }
        if let Some(s) = &self.stoplist {
            cfg.stoplist = s.clone();
        }
        if self.no_stem {
            cfg.stem = false;
        }
        match (&self.transform, self.metric) {
            (Some(t), m) => cfg.transform = parse_transform(t, m)?,
            (None, Some(m)) => cfg.transform = parse_transform("dcd", Some(m))?,
            (None, None) => {}
        }
        if let Some(b) = &self.budget {
            cfg.budget = b.parse::<Budget>()?;
        }
        if let Some(c) = &self.classifier {
            cfg.classifier = c.parse::<ClassifierSpec>()?;
        }
        if let Some(f) = self.folds {
            cfg.folds = f;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.no_stratify {
            cfg.stratify = false;
        }
        if let Some(m) = self.min_df {
            cfg.min_df = m;
        }
        if let Some(r) = self.raw_words {
            cfg.raw_words = Some(r);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("dcd-out"))
    }
}

/// Header lines embedded in every artifact: the exact invocation and seed.
pub fn provenance(cfg: &RunConfig) -> Vec<String> {
    let argv: Vec<String> = std::env::args()
        .map(|a| {
            if a.is_empty() || a.contains(|c: char| c.is_whitespace() || c == '\'' || c == '"') {
                format!("'{}'", a.replace('\'', "'\\''"))
            } else {
                a
            }
        })
        .collect();
    vec![
        format!("invocation: {}", argv.join(" ")),
        format!("seed: {}", cfg.seed),
        format!("dcd {}", env!("CARGO_PKG_VERSION")),
    ]
}
