use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use flate2::write::GzEncoder;
use flate2::Compression;

fn dcd(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcd"))
        .args(args)
        .env("DCD_CACHE_DIR", cache)
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn tsv_corpus(dir: &Path) -> String {
    let mut lines = String::new();
    for i in 0..12 {
        let (label, text) = match i % 3 {
            0 => ("oil", "Crude oil prices rose as OPEC cut barrel output"),
            1 => ("grain", "Wheat and corn harvests exported in tonnes"),
            _ => ("money", "Central bank interest rates and currency dealers"),
        };
        lines.push_str(&format!("{label}\t{text} item{}\n", "x".repeat(i)));
    }
    let p = dir.join("corpus.tsv");
    fs::write(&p, lines).unwrap();
    p.display().to_string()
}

#[test]
fn unknown_subcommand_fails_with_usage() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dcd(&["frobnicate"], tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = dcd(&["eval", "--bogus-flag"], tmp.path());
    assert!(!out.status.success());
}

#[test]
fn help_for_every_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    for sub in [
        "prep",
        "vectorize",
        "dcd",
        "select",
        "eval",
        "topwords",
        "bench",
        "fetch",
    ] {
        let text = ok(&dcd(&[sub, "--help"], tmp.path()));
        assert!(text.contains("Usage"), "{sub}");
    }
}

#[test]
fn failures_are_single_line_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        vec!["eval", "--corpus-tsv", "/nonexistent/c.tsv"],
        vec!["eval", "--folds", "1"],
        vec!["eval", "--transform", "svd"],
        vec!["eval", "--budget", "1.5"],
        vec!["eval", "--classifier", "svm"],
        vec!["eval", "--transform", "ig", "--metric", "cosine"],
        vec!["eval", "--config", "/nonexistent/run.toml"],
    ] {
        let out = dcd(&args, tmp.path());
        assert!(!out.status.success(), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error: "), "{err}");
    }
}

#[test]
fn eval_with_config_writes_deterministic_report() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("run.toml"),
        "transform = \"dcd-cosine\"\nclassifier = \"knn:3\"\nfolds = 4\nseed = 9\n\n[corpus]\nkind = \"synthetic\"\ndocs_per_class = 20\n",
    )
    .unwrap();
    let cfg = tmp.path().join("run.toml").display().to_string();
    let mut reports = Vec::new();
    for name in ["a", "b"] {
        let out_dir = tmp.path().join(name).display().to_string();
        let stdout = ok(&dcd(
            &["eval", "--config", &cfg, "--out-dir", &out_dir],
            tmp.path(),
        ));
        assert!(stdout.contains("DCD.C"));
        reports.push(fs::read_to_string(tmp.path().join(name).join("report.json")).unwrap());
    }
    // provenance names the out-dir, which differs between the two runs
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.contains("invocation"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&reports[0]), strip(&reports[1]));
    assert!(reports[0].contains("\"seed\": 9"));
    assert!(reports[0].contains("seed: 9"));
    assert!(reports[0].contains("invocation: "));
    assert!(tmp.path().join("a/fold-03/representatives.tsv").exists());
    assert!(tmp.path().join("a/folds.tsv").exists());

    // the identical invocation rewrites identical bytes
    let snapshot = |dir: &Path| -> Vec<(String, Vec<u8>)> {
        let mut files = Vec::new();
        for fold in fs::read_dir(dir).unwrap() {
            let p = fold.unwrap().path();
            let entries: Vec<_> = if p.is_dir() {
                fs::read_dir(&p)
                    .unwrap()
                    .map(|e| e.unwrap().path())
                    .collect()
            } else {
                vec![p]
            };
            for f in entries {
                files.push((f.display().to_string(), fs::read(&f).unwrap()));
            }
        }
        files.sort();
        files
    };
    let a_dir = tmp.path().join("a");
    let before = snapshot(&a_dir);
    ok(&dcd(
        &[
            "eval",
            "--config",
            &cfg,
            "--out-dir",
            a_dir.to_str().unwrap(),
        ],
        tmp.path(),
    ));
    assert_eq!(before, snapshot(&a_dir));

    // flags override file values
    let out_dir = tmp.path().join("c").display().to_string();
    ok(&dcd(
        &[
            "eval",
            "--config",
            &cfg,
            "--transform",
            "dcd",
            "--metric",
            "euclidean",
            "--folds",
            "2",
            "--out-dir",
            &out_dir,
        ],
        tmp.path(),
    ));
    let json = fs::read_to_string(tmp.path().join("c/report.json")).unwrap();
    assert!(json.contains("\"transform\": \"dcd-euclidean\""));
    assert!(json.contains("\"folds\": 2"));
}

#[test]
fn bench_prints_table_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let stdout = ok(&dcd(
        &[
            "bench",
            "--dataset",
            "synthetic",
            "--transform",
            "dcd-cosine,ig",
            "--budget",
            "k,0.2",
            "--classifier",
            "knn:5",
            "--folds",
            "3",
        ],
        tmp.path(),
    ));
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 4, "{stdout}");
    assert!(lines[0].starts_with("Tech"));
    assert!(lines[1].starts_with("DCD.C"));
    assert!(lines[2].starts_with("IG@k"));
    assert!(lines[3].starts_with("IG@0.2"));
}

#[test]
fn standalone_pipeline_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tsv_corpus(tmp.path());
    let stdout = ok(&dcd(&["prep", "--corpus-tsv", &corpus], tmp.path()));
    assert!(stdout.starts_with("# invocation: "));
    assert!(stdout.contains("line1\toil\tcrude oil price rose opec cut barrel output item"));

    let out = tmp.path().join("vec");
    ok(&dcd(
        &[
            "vectorize",
            "--corpus-tsv",
            &corpus,
            "--out-dir",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    ));
    let m = dcdistance::io::read_svmlight_file(&out.join("matrix.svm")).unwrap();
    let v = dcdistance::io::read_vocabulary_file(&out.join("vocab.tsv")).unwrap();
    assert_eq!(m.len(), 12);
    assert_eq!(m.dim, v.len());

    let out = tmp.path().join("dcd");
    ok(&dcd(
        &[
            "dcd",
            "--corpus-tsv",
            &corpus,
            "--metric",
            "cosine",
            "--out-dir",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    ));
    let text = fs::read_to_string(out.join("features.svm")).unwrap();
    assert!(text.contains("# metric cosine\n# dim 3\n"));

    let out = tmp.path().join("sel");
    ok(&dcd(
        &[
            "select",
            "--corpus-tsv",
            &corpus,
            "--transform",
            "ig",
            "--budget",
            "k",
            "--out-dir",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    ));
    let mask = fs::read_to_string(out.join("mask.txt")).unwrap();
    assert_eq!(mask.lines().filter(|l| !l.starts_with('#')).count(), 3);

    let stdout = ok(&dcd(
        &["topwords", "--corpus-tsv", &corpus, "--top-n", "3"],
        tmp.path(),
    ));
    assert_eq!(stdout.lines().count(), 3);
    assert!(stdout.lines().any(|l| l.starts_with("grain\t")));
}

fn fake_reuters_archive(path: &Path) {
    let mut sgm = String::from("<!DOCTYPE lewis SYSTEM \"lewis.dtd\">\n");
    let topics = ["crude", "wheat", "earn"];
    for i in 0..30 {
        let topic = topics[i % 3];
        let body = match topic {
            "crude" => "Crude oil output from OPEC members, barrels of oil per day",
            "wheat" => "Wheat exports reached tonnes of wheat, grain traders said",
            _ => "Quarterly earnings per share and net profit rose",
        };
        sgm.push_str(&format!(
            "<REUTERS TOPICS=\"YES\" LEWISSPLIT=\"TEST\" CGISPLIT=\"TRAINING-SET\" OLDID=\"{i}\" NEWID=\"{i}\">\n<TOPICS><D>{topic}</D></TOPICS>\n<TEXT><TITLE>NEWS {i}</TITLE><BODY>{body} {i}\n</BODY></TEXT>\n</REUTERS>\n"
        ));
    }
    let mut builder = tar::Builder::new(GzEncoder::new(
        fs::File::create(path).unwrap(),
        Compression::default(),
    ));
    let mut header = tar::Header::new_gnu();
    header.set_size(sgm.len() as u64);
    header.set_mode(0o644);
    header.set_cksum();
    builder
        .append_data(&mut header, "reut2-000.sgm", sgm.as_bytes())
        .unwrap();
    builder.into_inner().unwrap().finish().unwrap();
}

#[test]
fn fetch_from_local_archive_verifies_checksum() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = tmp.path().join("cache");
    let archive = tmp.path().join("reuters.tar.gz");
    fake_reuters_archive(&archive);
    let a = archive.to_str().unwrap();

    let out = dcd(
        &["fetch", "reuters", "--from", a, "--sha256", &"0".repeat(64)],
        &cache,
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("checksum mismatch"));

    ok(&dcd(&["fetch", "reuters", "--from", a], &cache));
    assert!(cache.join("reuters21578/reut2-000.sgm").exists());
    let recorded = fs::read_to_string(cache.join("reuters21578.sha256")).unwrap();
    assert_eq!(recorded.trim().len(), 64);
    // the recorded digest is enforced on the next fetch
    ok(&dcd(&["fetch", "reuters", "--from", a], &cache));

    let stdout = ok(&dcd(
        &["topwords", "--dataset", "reuters", "--top-n", "4"],
        &cache,
    ));
    let crude = stdout.lines().find(|l| l.starts_with("crude\t")).unwrap();
    assert!(crude.contains("oil"), "{crude}");
    let stdout = ok(&dcd(
        &[
            "bench",
            "--dataset",
            "reuters",
            "--transform",
            "dcd-cosine",
            "--classifier",
            "knn:5",
            "--folds",
            "2",
        ],
        &cache,
    ));
    assert!(stdout.lines().nth(1).unwrap().starts_with("DCD.C"));
}
