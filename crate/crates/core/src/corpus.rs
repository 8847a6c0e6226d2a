//! Labeled corpora and cross-validation folds.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            label: label.into(),
        }
    }
}

/// An ordered collection of documents and the ordered list of their classes.
///
/// Class order is the order of first appearance in `docs`; every class index
/// used elsewhere in the crate refers to this order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCorpus {
    docs: Vec<Document>,
    classes: Vec<String>,
    labels: Vec<usize>,
}

impl LabeledCorpus {
    pub fn new(docs: Vec<Document>) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::Config("corpus has no documents".into()));
        }
        let mut seen = HashSet::new();
        let mut classes: Vec<String> = Vec::new();
        let mut labels = Vec::with_capacity(docs.len());
        for doc in &docs {
            if doc.label.is_empty() {
                return Err(Error::Config(format!(
                    "document `{}` has an empty label",
                    doc.id
                )));
            }
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::Config(format!("duplicate document id `{}`", doc.id)));
            }
            let idx = match classes.iter().position(|c| *c == doc.label) {
                Some(i) => i,
                None => {
                    classes.push(doc.label.clone());
                    classes.len() - 1
                }
            };
            labels.push(idx);
        }
        Ok(LabeledCorpus {
            docs,
            classes,
            labels,
        })
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Class index of every document, aligned with `docs()`.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == label)
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.classes.len()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Returns a copy with the text of the selected documents replaced.
    pub fn with_texts(&self, mut replace: impl FnMut(usize, &Document) -> Option<String>) -> Self {
        let mut out = self.clone();
        for (i, doc) in out.docs.iter_mut().enumerate() {
            if let Some(text) = replace(i, &self.docs[i]) {
                doc.text = text;
            }
        }
        out
    }
}

fn read_lossy(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::Ingestion {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = fs::read_dir(dir).map_err(|e| Error::Ingestion {
        path: dir.to_path_buf(),
        reason: e.to_string(),
    })?;
    let mut paths = Vec::new();
    for entry in rd {
        let entry = entry.map_err(|e| Error::Ingestion {
            path: dir.to_path_buf(),
            reason: e.to_string(),
        })?;
        paths.push(entry.path());
    }
    paths.sort();
    Ok(paths)
}

/// Loads a "one directory per class, one file per document" corpus.
///
/// Labels are subdirectory names and ids are `<dir>/<filename>`. Both levels
/// are visited in lexicographic order, so class order is lexicographic too.
/// Non-UTF-8 bytes are replaced.
pub fn load_directory_corpus(root: impl AsRef<Path>) -> Result<LabeledCorpus> {
    let root = root.as_ref();
    let mut docs = Vec::new();
    collect_class_dirs(root, "", &mut docs)?;
    if docs.is_empty() {
        return Err(Error::Ingestion {
            path: root.to_path_buf(),
            reason: "no class subdirectory with readable files".into(),
        });
    }
    LabeledCorpus::new(docs)
}

fn collect_class_dirs(root: &Path, id_prefix: &str, docs: &mut Vec<Document>) -> Result<()> {
    for class_dir in sorted_entries(root)? {
        if !class_dir.is_dir() {
            continue;
        }
        let label = class_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        for file in sorted_entries(&class_dir)? {
            if !file.is_file() {
                continue;
            }
            let name = file.file_name().unwrap().to_string_lossy().into_owned();
            let text = read_lossy(&file)?;
            docs.push(Document::new(
                format!("{id_prefix}{label}/{name}"),
                text,
                label.clone(),
            ));
        }
    }
    Ok(())
}

/// Loads the 20 Newsgroups "by date" distribution: both
/// `20news-bydate-train` and `20news-bydate-test` under `root`, merged, with
/// ids prefixed `train/` and `test/`.
pub fn load_newsgroups(root: impl AsRef<Path>) -> Result<LabeledCorpus> {
    let root = root.as_ref();
    let mut docs = Vec::new();
    for part in ["train", "test"] {
        let dir = root.join(format!("20news-bydate-{part}"));
        if !dir.is_dir() {
            return Err(Error::Ingestion {
                path: dir,
                reason: "missing 20news-bydate directory".into(),
            });
        }
        collect_class_dirs(&dir, &format!("{part}/"), &mut docs)?;
    }
    LabeledCorpus::new(docs)
}

/// Loads a corpus with one `label<TAB>text` record per line.
///
/// Blank lines are skipped. The id of a record is `line<N>` with the 1-based
/// line number.
pub fn load_tsv_corpus(path: impl AsRef<Path>) -> Result<LabeledCorpus> {
    let path = path.as_ref();
    let content = read_lossy(path)?;
    let mut docs = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (label, text) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            reason: "missing tab between label and text".into(),
        })?;
        docs.push(Document::new(format!("line{}", i + 1), text, label.trim()));
    }
    if docs.is_empty() {
        return Err(Error::Ingestion {
            path: path.to_path_buf(),
            reason: "no records".into(),
        });
    }
    LabeledCorpus::new(docs).map_err(|e| match e {
        Error::Config(reason) => Error::Ingestion {
            path: path.to_path_buf(),
            reason,
        },
        other => other,
    })
}

/// The ten most frequent Reuters-21578 topics under the ModApte split.
pub const REUTERS_TOP10: [&str; 10] = [
    "earn", "acq", "money-fx", "grain", "crude", "trade", "interest", "ship", "wheat", "corn",
];

/// Loads the ModApte test portion of the Reuters-21578 SGML distribution
/// (`reut2-*.sgm`), restricted to documents carrying one of the ten largest
/// topics. A document's label is its first listed top-10 topic.
pub fn load_reuters_sgml(dir: impl AsRef<Path>) -> Result<LabeledCorpus> {
    let dir = dir.as_ref();
    let mut docs = Vec::new();
    for file in sorted_entries(dir)? {
        let name = file.file_name().unwrap().to_string_lossy().into_owned();
        if !(name.starts_with("reut2-") && name.ends_with(".sgm")) {
            continue;
        }
        let content = read_lossy(&file)?;
        for chunk in content.split("<REUTERS").skip(1) {
            let header_end = chunk.find('>').unwrap_or(0);
            let header = &chunk[..header_end];
            if attr(header, "TOPICS") != Some("YES") || attr(header, "LEWISSPLIT") != Some("TEST") {
                continue;
            }
            let Some(newid) = attr(header, "NEWID") else {
                continue;
            };
            let topics = between(chunk, "<TOPICS>", "</TOPICS>").unwrap_or("");
            let label = topics
                .split("<D>")
                .filter_map(|t| t.split("</D>").next())
                .find(|t| REUTERS_TOP10.contains(t));
            let Some(label) = label else {
                continue;
            };
            let title = between(chunk, "<TITLE>", "</TITLE>").unwrap_or("");
            let body = between(chunk, "<BODY>", "</BODY>").unwrap_or("");
            let text = unescape(&format!("{title}\n{body}"));
            docs.push(Document::new(format!("test/{newid}"), text, label));
        }
    }
    if docs.is_empty() {
        return Err(Error::Ingestion {
            path: dir.to_path_buf(),
            reason: "no ModApte test documents found in reut2-*.sgm files".into(),
        });
    }
    LabeledCorpus::new(docs)
}

fn attr<'a>(header: &'a str, name: &str) -> Option<&'a str> {
    let key = format!("{name}=\"");
    let start = header.find(&key)? + key.len();
    let len = header[start..].find('"')?;
    Some(&header[start..start + len])
}

fn between<'a>(s: &'a str, open: &str, close: &str) -> Option<&'a str> {
    let start = s.find(open)? + open.len();
    let len = s[start..].find(close)?;
    Some(&s[start..start + len])
}

fn unescape(s: &str) -> String {
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&#3;", "")
        .replace("&amp;", "&")
}

/// One cross-validation fold. Indices refer to positions in the corpus and
/// are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fold_index: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl FoldSplit {
    pub fn train_ids<'a>(&self, corpus: &'a LabeledCorpus) -> Vec<&'a str> {
        self.train
            .iter()
            .map(|&i| corpus.docs()[i].id.as_str())
            .collect()
    }

    pub fn test_ids<'a>(&self, corpus: &'a LabeledCorpus) -> Vec<&'a str> {
        self.test
            .iter()
            .map(|&i| corpus.docs()[i].id.as_str())
            .collect()
    }
}

fn folds_from_assignment(assign: &[usize], n_folds: usize) -> Vec<FoldSplit> {
    (0..n_folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..assign.len()).partition(|&i| assign[i] == f);
            FoldSplit {
                fold_index: f,
                train,
                test,
            }
        })
        .collect()
}

fn check_folds(corpus: &LabeledCorpus, folds: &[FoldSplit]) -> Result<()> {
    for fold in folds {
        let mut present = vec![false; corpus.n_classes()];
        for &i in &fold.train {
            present[corpus.labels()[i]] = true;
        }
        if let Some(c) = present.iter().position(|p| !p) {
            return Err(Error::UnseenClass {
                fold: fold.fold_index,
                class: corpus.classes()[c].clone(),
            });
        }
    }
    Ok(())
}

/// Stratified k-fold split.
///
/// Members of each class are shuffled with a ChaCha8 stream seeded by `seed`
/// and dealt round-robin over the folds. Each class starts dealing where the
/// previous class stopped, so total fold sizes also differ by at most one.
pub fn stratified_kfold(
    corpus: &LabeledCorpus,
    n_folds: usize,
    seed: u64,
) -> Result<Vec<FoldSplit>> {
    if n_folds < 2 {
        return Err(Error::Config(format!(
            "n_folds must be >= 2, got {n_folds}"
        )));
    }
    let sizes = corpus.class_sizes();
    for (c, &count) in sizes.iter().enumerate() {
        if count < n_folds {
            return Err(Error::Stratification {
                class: corpus.classes()[c].clone(),
                count,
                folds: n_folds,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assign = vec![0usize; corpus.len()];
    let mut next = 0usize;
    for c in 0..corpus.n_classes() {
        let mut members: Vec<usize> = (0..corpus.len())
            .filter(|&i| corpus.labels()[i] == c)
            .collect();
        members.shuffle(&mut rng);
        for i in members {
            assign[i] = next % n_folds;
            next += 1;
        }
    }
    let folds = folds_from_assignment(&assign, n_folds);
    check_folds(corpus, &folds)?;
    Ok(folds)
}

/// Plain shuffled k-fold split. Fails when a fold's training portion misses
/// a class.
pub fn shuffled_kfold(corpus: &LabeledCorpus, n_folds: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if n_folds < 2 || n_folds > corpus.len() {
        return Err(Error::Config(format!(
            "n_folds must be in [2, {}], got {n_folds}",
            corpus.len()
        )));
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assign = vec![0usize; corpus.len()];
    for (pos, &i) in order.iter().enumerate() {
        assign[i] = pos % n_folds;
    }
    let folds = folds_from_assignment(&assign, n_folds);
    check_folds(corpus, &folds)?;
    Ok(folds)
}

/// Writes `<doc id>\t<fold index>` lines in corpus order.
pub fn write_fold_assignments<W: Write>(
    corpus: &LabeledCorpus,
    folds: &[FoldSplit],
    mut out: W,
) -> Result<()> {
    let mut assign = vec![usize::MAX; corpus.len()];
    for fold in folds {
        for &i in &fold.test {
            assign[i] = fold.fold_index;
        }
    }
    for (doc, f) in corpus.docs().iter().zip(assign) {
        writeln!(out, "{}\t{}", doc.id, f)?;
    }
    Ok(())
}
