//! Plain-text artifact formats.
//!
//! Every writer accepts header lines that are emitted as `# ` comments
//! (provenance: invocation, seed, conventions). Readers skip comment lines
//! except the structural `# dim <n>` and `# n_docs <n>` headers. Weights are
//! written with 17 significant digits so they parse back bit-exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::corpus::LabeledCorpus;
use crate::dcdistance::{DcdFeatures, Metric, Representatives};
use crate::error::{Error, Result};
use crate::featselect::{FeatureMask, FeatureRanking};
use crate::sparse::SparseVector;
use crate::vectorizer::{CorpusMatrix, Vocabulary};

/// Formats a weight with 17 significant digits.
pub fn fmt_weight(w: f64) -> String {
    format!("{w:.16e}")
}

fn write_header<W: Write>(out: &mut W, header: &[String]) -> Result<()> {
    for line in header {
        for l in line.lines() {
            writeln!(out, "# {l}")?;
        }
    }
    Ok(())
}

fn structural(line: &str, key: &str) -> Option<String> {
    let rest = line.strip_prefix('#')?.trim_start().strip_prefix(key)?;
    rest.starts_with(char::is_whitespace)
        .then(|| rest.trim().to_string())
}

fn parse_err(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Ingestion {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
}

/// Numbered content lines; comment lines are passed to `on_comment`.
fn content_lines<R: BufRead>(
    reader: R,
    mut on_comment: impl FnMut(usize, &str) -> Result<()>,
) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.starts_with('#') {
            on_comment(i + 1, &line)?;
        } else if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

fn parse_pairs(tokens: &[&str], path: &Path, line: usize) -> Result<Vec<(usize, f64)>> {
    tokens
        .iter()
        .map(|tok| {
            let (j, w) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(path, line, format!("expected <j>:<w>, got `{tok}`")))?;
            let j = j
                .parse()
                .map_err(|_| parse_err(path, line, format!("bad index `{j}`")))?;
            let w = w
                .parse()
                .map_err(|_| parse_err(path, line, format!("bad weight `{w}`")))?;
            Ok((j, w))
        })
        .collect()
}

fn write_pairs<W: Write>(out: &mut W, pairs: impl Iterator<Item = (usize, f64)>) -> Result<()> {
    for (j, w) in pairs {
        write!(out, " {j}:{}", fmt_weight(w))?;
    }
    Ok(())
}

/// `<label-index> <j>:<w> ...`, 0-based columns, preceded by `# dim <n>`.
pub fn write_svmlight<W: Write>(
    matrix: &CorpusMatrix,
    header: &[String],
    mut out: W,
) -> Result<()> {
    write_header(&mut out, header)?;
    writeln!(out, "# dim {}", matrix.dim)?;
    for (row, label) in matrix.rows.iter().zip(&matrix.labels) {
        write!(out, "{label}")?;
        write_pairs(&mut out, row.iter())?;
        writeln!(out)?;
    }
    Ok(())
}

struct RawSvm {
    dim: Option<usize>,
    rows: Vec<(usize, Vec<(usize, f64)>)>,
}

fn read_raw_svmlight<R: BufRead>(reader: R, path: &Path) -> Result<RawSvm> {
    let mut dim = None;
    let lines = content_lines(reader, |n, l| {
        if let Some(v) = structural(l, "dim") {
            dim = Some(
                v.parse()
                    .map_err(|_| parse_err(path, n, format!("bad dim `{v}`")))?,
            );
        }
        Ok(())
    })?;
    let rows = lines
        .iter()
        .map(|(n, line)| {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let label = tokens[0]
                .parse()
                .map_err(|_| parse_err(path, *n, format!("bad label `{}`", tokens[0])))?;
            Ok((label, parse_pairs(&tokens[1..], path, *n)?))
        })
        .collect::<Result<_>>()?;
    Ok(RawSvm { dim, rows })
}

/// Inverse of [`write_svmlight`]. Without a `# dim` header the width is one
/// past the largest index.
pub fn read_svmlight<R: BufRead>(reader: R, path: &Path) -> Result<CorpusMatrix> {
    let raw = read_raw_svmlight(reader, path)?;
    let mut labels = Vec::with_capacity(raw.rows.len());
    let mut rows = Vec::with_capacity(raw.rows.len());
    for (label, pairs) in raw.rows {
        labels.push(label);
        rows.push(SparseVector::from_pairs(pairs)?);
    }
    let dim = raw
        .dim
        .unwrap_or_else(|| rows.iter().map(SparseVector::min_dim).max().unwrap_or(0));
    CorpusMatrix::new(rows, labels, dim)
}

pub fn read_svmlight_file(path: &Path) -> Result<CorpusMatrix> {
    read_svmlight(open(path)?, path)
}

/// Distance features in the same layout, every column written.
pub fn write_dcd_features<W: Write>(
    feats: &DcdFeatures,
    header: &[String],
    mut out: W,
) -> Result<()> {
    write_header(&mut out, header)?;
    writeln!(out, "# metric {}", feats.metric)?;
    writeln!(out, "# dim {}", feats.width())?;
    for (row, label) in feats.rows.iter().zip(&feats.labels) {
        write!(out, "{label}")?;
        write_pairs(&mut out, row.iter().copied().enumerate())?;
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_dcd_features<R: BufRead>(reader: R, path: &Path) -> Result<DcdFeatures> {
    let mut metric = None;
    let mut dim = None;
    let lines = content_lines(reader, |n, l| {
        if let Some(v) = structural(l, "metric") {
            metric = Some(
                v.parse::<Metric>()
                    .map_err(|e| parse_err(path, n, e.to_string()))?,
            );
        }
        if let Some(v) = structural(l, "dim") {
            dim = Some(
                v.parse::<usize>()
                    .map_err(|_| parse_err(path, n, format!("bad dim `{v}`")))?,
            );
        }
        Ok(())
    })?;
    let metric = metric.ok_or_else(|| parse_err(path, 0, "missing `# metric` header"))?;
    let dim = dim.ok_or_else(|| parse_err(path, 0, "missing `# dim` header"))?;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (n, line) in &lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        labels.push(
            tokens[0]
                .parse()
                .map_err(|_| parse_err(path, *n, format!("bad label `{}`", tokens[0])))?,
        );
        let mut row = vec![0.0; dim];
        for (j, w) in parse_pairs(&tokens[1..], path, *n)? {
            *row.get_mut(j)
                .ok_or_else(|| parse_err(path, *n, format!("column {j} >= dim {dim}")))? = w;
        }
        rows.push(row);
    }
    Ok(DcdFeatures {
        rows,
        labels,
        metric,
    })
}

/// `<term>\t<j>\t<df>` per column, preceded by `# n_docs <n>`.
pub fn write_vocabulary<W: Write>(vocab: &Vocabulary, header: &[String], mut out: W) -> Result<()> {
    write_header(&mut out, header)?;
    writeln!(out, "# n_docs {}", vocab.n_docs())?;
    for (j, (term, df)) in vocab.terms().iter().zip(vocab.doc_freq()).enumerate() {
        writeln!(out, "{term}\t{j}\t{df}")?;
    }
    Ok(())
}

pub fn read_vocabulary<R: BufRead>(reader: R, path: &Path) -> Result<Vocabulary> {
    let mut n_docs = None;
    let lines = content_lines(reader, |n, l| {
        if let Some(v) = structural(l, "n_docs") {
            n_docs = Some(
                v.parse()
                    .map_err(|_| parse_err(path, n, format!("bad n_docs `{v}`")))?,
            );
        }
        Ok(())
    })?;
    let n_docs = n_docs.ok_or_else(|| parse_err(path, 0, "missing `# n_docs` header"))?;
    let mut terms = Vec::with_capacity(lines.len());
    let mut dfs = Vec::with_capacity(lines.len());
    for (expected, (n, line)) in lines.iter().enumerate() {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            return Err(parse_err(path, *n, "expected <term>\\t<j>\\t<df>"));
        }
        if f[1].parse::<usize>().ok() != Some(expected) {
            return Err(parse_err(
                path,
                *n,
                format!("column `{}` out of sequence", f[1]),
            ));
        }
        let df = f[2]
            .parse()
            .map_err(|_| parse_err(path, *n, format!("bad df `{}`", f[2])))?;
        terms.push(f[0].to_string());
        dfs.push(df);
    }
    Vocabulary::from_columns(terms, dfs, n_docs)
}

pub fn read_vocabulary_file(path: &Path) -> Result<Vocabulary> {
    read_vocabulary(open(path)?, path)
}

/// `<class>\t<j>:<value> ...` over the nonzero entries.
pub fn write_representatives<W: Write>(
    reps: &Representatives,
    class_names: &[String],
    header: &[String],
    mut out: W,
) -> Result<()> {
    write_header(&mut out, header)?;
    writeln!(out, "# dim {}", reps.dim())?;
    for rep in reps.iter() {
        write!(out, "{}\t", class_names[rep.class_id])?;
        let entries: Vec<String> = rep
            .vector
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, &v)| format!("{j}:{}", fmt_weight(v)))
            .collect();
        writeln!(out, "{}", entries.join(" "))?;
    }
    Ok(())
}

pub fn read_representatives<R: BufRead>(
    reader: R,
    path: &Path,
) -> Result<(Vec<String>, Representatives)> {
    let mut dim = None;
    let lines = content_lines(reader, |n, l| {
        if let Some(v) = structural(l, "dim") {
            dim = Some(
                v.parse::<usize>()
                    .map_err(|_| parse_err(path, n, format!("bad dim `{v}`")))?,
            );
        }
        Ok(())
    })?;
    let dim = dim.ok_or_else(|| parse_err(path, 0, "missing `# dim` header"))?;
    let mut names = Vec::new();
    let mut vectors = Vec::new();
    for (n, line) in &lines {
        let (name, rest) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(path, *n, "expected <class>\\t<entries>"))?;
        let tokens: Vec<&str> = rest.split_whitespace().collect();
        let mut v = vec![0.0; dim];
        for (j, w) in parse_pairs(&tokens, path, *n)? {
            *v.get_mut(j)
                .ok_or_else(|| parse_err(path, *n, format!("column {j} >= dim {dim}")))? = w;
        }
        names.push(name.to_string());
        vectors.push(v);
    }
    Ok((names, Representatives::from_vectors(vectors)?))
}

/// `<term>\t<score>` in ranking order (descending score).
pub fn write_ranking<W: Write>(
    ranking: &FeatureRanking,
    vocab: &Vocabulary,
    header: &[String],
    mut out: W,
) -> Result<()> {
    write_header(&mut out, header)?;
    for &j in &ranking.order {
        writeln!(out, "{}\t{}", vocab.term(j), fmt_weight(ranking.scores[j]))?;
    }
    Ok(())
}

/// One selected column index per line.
pub fn write_mask<W: Write>(mask: &FeatureMask, header: &[String], mut out: W) -> Result<()> {
    write_header(&mut out, header)?;
    for j in mask.selected() {
        writeln!(out, "{j}")?;
    }
    Ok(())
}

pub fn read_mask<R: BufRead>(reader: R, path: &Path, dim: usize) -> Result<FeatureMask> {
    let lines = content_lines(reader, |_, _| Ok(()))?;
    let selected = lines
        .iter()
        .map(|(n, l)| {
            l.trim()
                .parse()
                .map_err(|_| parse_err(path, *n, format!("bad index `{l}`")))
        })
        .collect::<Result<Vec<usize>>>()?;
    FeatureMask::new(selected, dim)
}

/// `<doc id>\t<gold>\t<predicted>` with class names.
pub fn write_predictions<W: Write>(
    corpus: &LabeledCorpus,
    rows: &[usize],
    predicted: &[usize],
    header: &[String],
    mut out: W,
) -> Result<()> {
    write_header(&mut out, header)?;
    for (&i, &p) in rows.iter().zip(predicted) {
        let doc = &corpus.docs()[i];
        writeln!(out, "{}\t{}\t{}", doc.id, doc.label, corpus.classes()[p])?;
    }
    Ok(())
}

/// `<class>\t<w1,...,wn>`.
pub fn write_top_words<W: Write>(
    top: &[(String, Vec<String>)],
    header: &[String],
    mut out: W,
) -> Result<()> {
    write_header(&mut out, header)?;
    for (class, words) in top {
        writeln!(out, "{class}\t{}", words.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: &str = "mem";

    fn svm_roundtrip(m: &CorpusMatrix) -> CorpusMatrix {
        let mut buf = Vec::new();
        write_svmlight(m, &["cmd: test".into()], &mut buf).unwrap();
        read_svmlight(&buf[..], Path::new(P)).unwrap()
    }

    #[test]
    fn svmlight_layout() {
        let m = CorpusMatrix::new(
            vec![
                SparseVector::from_pairs(vec![(0, 0.5), (3, 2.0)]).unwrap(),
                SparseVector::new(),
            ],
            vec![1, 0],
            5,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_svmlight(&m, &[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# dim 5\n1 0:5.0000000000000000e-1 3:2.0000000000000000e0\n0\n"
        );
        assert_eq!(svm_roundtrip(&m), m);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = read_svmlight(&b"# dim 3\n0 1:0.5\n1 2:x\n"[..], Path::new(P)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = read_svmlight(&b"0 1:0.5 1:0.7\n"[..], Path::new(P)).unwrap_err();
        assert!(matches!(err, Error::Invariant(_)));
    }

    #[test]
    fn vocabulary_roundtrip() {
        let docs = vec![
            vec!["oil".to_string(), "crude".into()],
            vec!["oil".into(), "wheat".into()],
        ];
        let v = Vocabulary::fit(&docs).unwrap();
        let mut buf = Vec::new();
        write_vocabulary(&v, &["seed 42".into()], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("oil\t0\t2\ncrude\t1\t1\n"));
        let back = read_vocabulary(&buf[..], Path::new(P)).unwrap();
        assert_eq!(back.terms(), v.terms());
        assert_eq!(back.doc_freq(), v.doc_freq());
        assert_eq!(back.index_of("wheat"), Some(2));
    }

    #[test]
    fn representatives_and_features_roundtrip() {
        let reps =
            Representatives::from_vectors(vec![vec![0.1, 0.0, 1.0 / 3.0], vec![0.0, 2.0, 0.0]])
                .unwrap();
        let names = vec!["earn".to_string(), "acq".to_string()];
        let mut buf = Vec::new();
        write_representatives(&reps, &names, &[], &mut buf).unwrap();
        let (n2, r2) = read_representatives(&buf[..], Path::new(P)).unwrap();
        assert_eq!(n2, names);
        assert_eq!(r2, reps);

        let feats = DcdFeatures {
            rows: vec![vec![0.0, 1.0 / 7.0], vec![2.5, 0.3]],
            labels: vec![0, 1],
            metric: Metric::Cosine,
        };
        let mut buf = Vec::new();
        write_dcd_features(&feats, &["x".into()], &mut buf).unwrap();
        assert_eq!(read_dcd_features(&buf[..], Path::new(P)).unwrap(), feats);
    }

    #[test]
    fn mask_and_ranking_layout() {
        let mask = FeatureMask::new(vec![4, 1], 6).unwrap();
        let mut buf = Vec::new();
        write_mask(&mask, &[], &mut buf).unwrap();
        assert_eq!(buf, b"1\n4\n");
        assert_eq!(read_mask(&buf[..], Path::new(P), 6).unwrap(), mask);

        let v = Vocabulary::fit(&[vec!["a".to_string(), "b".into()]]).unwrap();
        let r = FeatureRanking::from_scores(vec![0.5, 2.0]);
        let mut buf = Vec::new();
        write_ranking(&r, &v, &[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("b\t2.0"));
    }

    proptest! {
        #[test]
        fn svmlight_bit_exact(rows in prop::collection::vec(
            prop::collection::btree_map(0usize..50, prop::num::f64::POSITIVE | prop::num::f64::NORMAL, 0..10), 1..8)) {
            let rows: Vec<SparseVector> = rows.into_iter()
                .map(|m| SparseVector::from_pairs(m.into_iter().map(|(j, w)| (j, w.abs())).collect()).unwrap())
                .collect();
            let labels = (0..rows.len()).map(|i| i % 3).collect();
            let m = CorpusMatrix::new(rows, labels, 50).unwrap();
            let back = svm_roundtrip(&m);
            for (a, b) in m.rows.iter().zip(&back.rows) {
                prop_assert_eq!(a.indices(), b.indices());
                for (x, y) in a.values().iter().zip(b.values()) {
                    prop_assert_eq!(x.to_bits(), y.to_bits());
                }
            }
            prop_assert_eq!(back, m);
        }
    }
}
