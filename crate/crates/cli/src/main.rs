mod config;
mod fetch;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dcdistance::dcdistance::{build_representatives, transform};
use dcdistance::eval::{
    class_top_words, format_table, run_on_corpus, write_run_dir, Budget, ClassifierSpec, RunConfig,
};
use dcdistance::featselect::{
    apply_mask, igfss_select, odds_ratio_classes, vgfss_select, ContingencyCounts, GlobalScorer,
};
use dcdistance::io as dio;
use dcdistance::vectorizer::Vocabulary;
use dcdistance::{corpus::LabeledCorpus, eval::Transform};

use config::{parse_transform, provenance, CommonArgs};
use fetch::FetchArgs;

#[derive(Parser)]
#[command(
    name = "dcd",
    version,
    about = "Document-to-class distance features and filter feature-selection baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize, remove stopwords and stem: `<id>\t<label>\t<tokens>` lines.
    Prep(CommonArgs),
    /// TF-IDF matrix (svmlight) and vocabulary of the whole corpus.
    Vectorize(CommonArgs),
    /// Class representatives and distance features of the whole corpus.
    Dcd(CommonArgs),
    /// Feature ranking, mask and reduced matrix of the whole corpus.
    Select(CommonArgs),
    /// Cross-validated experiment writing a report directory.
    Eval(CommonArgs),
    /// Highest-weighted terms of every class representative.
    Topwords(TopwordsArgs),
    /// Runs a grid of transforms, budgets and classifiers; prints a table.
    Bench(CommonArgs),
    /// Downloads a public dataset into the cache (DCD_CACHE_DIR).
    Fetch(FetchArgs),
}

#[derive(Args)]
struct TopwordsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Terms per class.
    #[arg(long, default_value_t = 10)]
    top_n: usize,
}

fn load(cfg: &RunConfig) -> Result<LabeledCorpus> {
    Ok(cfg.corpus.load()?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| {
        format!("cannot create {}", path.display())
    })?))
}

fn tokens(corpus: &LabeledCorpus, cfg: &RunConfig) -> Result<Vec<Vec<String>>> {
    let pre = cfg.preprocessor()?;
    Ok(corpus.docs().iter().map(|d| pre.process(&d.text)).collect())
}

fn prep(args: &CommonArgs) -> Result<()> {
    let cfg = args.run_config()?;
    let corpus = load(&cfg)?;
    let toks = tokens(&corpus, &cfg)?;
    let mut out: Box<dyn Write> = match &args.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Box::new(create(&dir.join("tokens.tsv"))?)
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    for line in provenance(&cfg) {
        writeln!(out, "# {line}")?;
    }
    for (doc, t) in corpus.docs().iter().zip(&toks) {
        writeln!(out, "{}\t{}\t{}", doc.id, doc.label, t.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

/// Vocabulary fitted on the whole corpus, for the inspection commands.
struct Whole {
    cfg: RunConfig,
    corpus: LabeledCorpus,
    toks: Vec<Vec<String>>,
    vocab: Vocabulary,
    dir: PathBuf,
}

fn fit_whole(args: &CommonArgs) -> Result<Whole> {
    let cfg = args.run_config()?;
    let corpus = load(&cfg)?;
    let toks = tokens(&corpus, &cfg)?;
    let vocab = Vocabulary::fit_with_min_df(&toks, cfg.min_df)?;
    let dir = args.out_dir();
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(Whole {
        cfg,
        corpus,
        toks,
        vocab,
        dir,
    })
}

fn vectorize(args: &CommonArgs) -> Result<()> {
    let Whole {
        cfg,
        corpus,
        toks,
        vocab,
        dir,
    } = fit_whole(args)?;
    let header = provenance(&cfg);
    let m = vocab.transform(&toks, corpus.labels());
    dio::write_vocabulary(&vocab, &header, create(&dir.join("vocab.tsv"))?)?;
    dio::write_svmlight(&m, &header, create(&dir.join("matrix.svm"))?)?;
    println!(
        "{} documents x {} terms -> {}",
        m.len(),
        m.dim,
        dir.display()
    );
    Ok(())
}

fn dcd(args: &CommonArgs) -> Result<()> {
    let Whole {
        cfg,
        corpus,
        toks,
        vocab,
        dir,
    } = fit_whole(args)?;
    let Some(metric) = cfg.transform.dcd_metric() else {
        bail!("dcd needs a dcd transform, got `{}`", cfg.transform);
    };
    let header = provenance(&cfg);
    let m = vocab.transform(&toks, corpus.labels());
    let reps = build_representatives(&m, corpus.classes())?;
    let feats = transform(&m, &reps, metric)?;
    dio::write_vocabulary(&vocab, &header, create(&dir.join("vocab.tsv"))?)?;
    dio::write_representatives(
        &reps,
        corpus.classes(),
        &header,
        create(&dir.join("representatives.tsv"))?,
    )?;
    dio::write_dcd_features(&feats, &header, create(&dir.join("features.svm"))?)?;
    println!(
        "{} documents x {} terms -> {} {metric} distance features -> {}",
        m.len(),
        m.dim,
        feats.width(),
        dir.display()
    );
    Ok(())
}

fn select(args: &CommonArgs) -> Result<()> {
    let Whole {
        cfg,
        corpus,
        toks,
        vocab,
        dir,
    } = fit_whole(args)?;
    if !cfg.transform.is_selection() {
        bail!(
            "select needs --transform ig, chi2, igfss or vgfss, got `{}`",
            cfg.transform
        );
    }
    let header = provenance(&cfg);
    let k = corpus.n_classes();
    let presence: Vec<Vec<usize>> = toks.iter().map(|t| vocab.presence(t)).collect();
    let counts = ContingencyCounts::from_presence(&presence, corpus.labels(), vocab.len(), k);
    let n_sel = cfg.budget.resolve(vocab.len(), k)?;
    let (ranking, mask) = match cfg.transform {
        Transform::Ig | Transform::Chi2 => {
            let scorer = if cfg.transform == Transform::Ig {
                GlobalScorer::Ig
            } else {
                GlobalScorer::Chi2
            };
            let r = scorer.rank(&counts);
            let m = r.top(n_sel)?;
            (r, m)
        }
        Transform::Igfss => {
            let r = cfg.gfs.rank(&counts);
            let m = igfss_select(&r, &odds_ratio_classes(&counts), n_sel, k)?;
            (r, m)
        }
        _ => {
            let r = cfg.gfs.rank(&counts);
            let m = vgfss_select(
                &r,
                &odds_ratio_classes(&counts),
                n_sel,
                counts.class_sizes(),
            )?;
            (r, m)
        }
    };
    let m = vocab.transform(&toks, corpus.labels());
    dio::write_vocabulary(&vocab, &header, create(&dir.join("vocab.tsv"))?)?;
    dio::write_ranking(&ranking, &vocab, &header, create(&dir.join("ranking.tsv"))?)?;
    dio::write_mask(&mask, &header, create(&dir.join("mask.txt"))?)?;
    dio::write_svmlight(
        &apply_mask(&m, &mask)?,
        &header,
        create(&dir.join("selected.svm"))?,
    )?;
    println!(
        "{} of {} terms selected by {} -> {}",
        mask.len(),
        vocab.len(),
        cfg.transform,
        dir.display()
    );
    Ok(())
}

fn eval(args: &CommonArgs) -> Result<()> {
    let cfg = args.run_config()?;
    let exp = run_on_corpus(load(&cfg)?, &cfg)?;
    let dir = args.out_dir();
    write_run_dir(&exp, &dir, &provenance(&cfg))?;
    print!("{}", format_table(std::slice::from_ref(&exp.report), true));
    println!("report written to {}", dir.display());
    Ok(())
}

fn topwords(args: &TopwordsArgs) -> Result<()> {
    let cfg = args.common.run_config()?;
    let corpus = load(&cfg)?;
    let top = class_top_words(&corpus, &cfg, args.top_n)?;
    let header = provenance(&cfg);
    if let Some(dir) = &args.common.out_dir {
        fs::create_dir_all(dir)?;
        dio::write_top_words(&top, &header, create(&dir.join("top_words.tsv"))?)?;
    }
    dio::write_top_words(&top, &[], io::stdout().lock())?;
    Ok(())
}

fn list<T>(value: &Option<String>, parse: impl Fn(&str) -> Result<T>) -> Result<Option<Vec<T>>> {
    value
        .as_ref()
        .map(|v| v.split(',').map(|s| parse(s.trim())).collect())
        .transpose()
}

fn bench(args: &CommonArgs) -> Result<()> {
    // list-valued flags are expanded here; the remaining flags build the base config
    let single = CommonArgs {
        transform: None,
        metric: None,
        budget: None,
        classifier: None,
        ..args.clone()
    };
    let base = single.run_config()?;
    let transforms = list(&args.transform, |s| parse_transform(s, args.metric))?
        .unwrap_or_else(|| vec![base.transform]);
    let budgets =
        list(&args.budget, |s| Ok(s.parse::<Budget>()?))?.unwrap_or_else(|| vec![base.budget]);
    let classifiers = list(&args.classifier, |s| Ok(s.parse::<ClassifierSpec>()?))?
        .unwrap_or_else(|| vec![base.classifier]);
    let corpus = load(&base)?;
    let mut reports = Vec::new();
    for &t in &transforms {
        let budgets: &[Budget] = if t.is_selection() {
            &budgets
        } else {
            &budgets[..1]
        };
        for &b in budgets {
            for &c in &classifiers {
                let cfg = RunConfig {
                    transform: t,
                    budget: b,
                    classifier: c,
                    ..base.clone()
                };
                let exp = run_on_corpus(corpus.clone(), &cfg)?;
                if let Some(dir) = &args.out_dir {
                    let name = format!("{}_{}", cfg.technique(), c).replace([':', '@'], "-");
                    write_run_dir(&exp, &dir.join(name), &provenance(&cfg))?;
                }
                reports.push(exp.report);
            }
        }
    }
    print!("{}", format_table(&reports, true));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prep(a) => prep(&a),
        Command::Vectorize(a) => vectorize(&a),
        Command::Dcd(a) => dcd(&a),
        Command::Select(a) => select(&a),
        Command::Eval(a) => eval(&a),
        Command::Topwords(a) => topwords(&a),
        Command::Bench(a) => bench(&a),
        Command::Fetch(a) => {
            let dir = fetch::fetch(&a)?;
            println!("extracted into {}", dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
