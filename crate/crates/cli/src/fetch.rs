use std::fs::{self, File};
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use dcdistance::datasets;
use flate2::read::GzDecoder;
use sha2::{Digest, Sha256};

use crate::config::Dataset;

pub const REUTERS_URL: &str = "https://kdd.ics.uci.edu/databases/reuters21578/reuters21578.tar.gz";
pub const NEWSGROUPS_URL: &str = "http://qwone.com/~jason/20Newsgroups/20news-bydate.tar.gz";

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// reuters or 20ng.
    #[arg(value_enum)]
    pub dataset: Dataset,
    /// Use a local .tar.gz instead of downloading.
    #[arg(long)]
    pub from: Option<PathBuf>,
    /// Override the download URL.
    #[arg(long)]
    pub url: Option<String>,
    /// Expected SHA-256 of the archive (hex).
    #[arg(long)]
    pub sha256: Option<String>,
}

fn hash_file(path: &Path) -> Result<String> {
    let mut r = BufReader::new(
        File::open(path).with_context(|| format!("cannot open {}", path.display()))?,
    );
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = r.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

fn download(url: &str, dest: &Path) -> Result<()> {
    let mut resp = ureq::get(url)
        .call()
        .with_context(|| format!("download of {url} failed"))?;
    let mut out = File::create(dest)?;
    io::copy(&mut resp.body_mut().as_reader(), &mut out)
        .with_context(|| format!("reading {url}"))?;
    out.flush()?;
    Ok(())
}

/// Fetches (or copies) the archive, checks its SHA-256 and unpacks it into
/// the cache. Without `--sha256`, the digest recorded by the first
/// successful fetch is enforced on later fetches.
pub fn fetch(args: &FetchArgs) -> Result<PathBuf> {
    let cache = datasets::cache_dir();
    let (name, target, default_url) = match args.dataset {
        Dataset::Reuters => ("reuters21578", datasets::reuters_dir(&cache), REUTERS_URL),
        Dataset::Newsgroups => (
            "20news-bydate",
            datasets::newsgroups_dir(&cache),
            NEWSGROUPS_URL,
        ),
        Dataset::Synthetic => bail!("the synthetic corpus is generated, not fetched"),
    };
    fs::create_dir_all(&cache)
        .with_context(|| format!("cannot create cache {}", cache.display()))?;
    let archive = cache.join(format!("{name}.tar.gz"));
    match &args.from {
        Some(src) => {
            fs::copy(src, &archive).with_context(|| format!("cannot copy {}", src.display()))?;
        }
        None => download(args.url.as_deref().unwrap_or(default_url), &archive)?,
    }
    let digest = hash_file(&archive)?;
    let record = cache.join(format!("{name}.sha256"));
    let expected = match &args.sha256 {
        Some(h) => Some(h.to_lowercase()),
        None => fs::read_to_string(&record)
            .ok()
            .map(|s| s.trim().to_string()),
    };
    if let Some(want) = expected {
        if want != digest {
            fs::remove_file(&archive).ok();
            bail!("checksum mismatch for {name}: expected {want}, got {digest}");
        }
    }
    fs::write(&record, format!("{digest}\n"))?;
    if target.exists() {
        fs::remove_dir_all(&target)?;
    }
    fs::create_dir_all(&target)?;
    tar::Archive::new(GzDecoder::new(BufReader::new(File::open(&archive)?)))
        .unpack(&target)
        .with_context(|| format!("cannot unpack {}", archive.display()))?;
    Ok(target)
}
