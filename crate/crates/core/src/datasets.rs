//! Locations of cached public datasets.

use std::env;
use std::path::{Path, PathBuf};

/// Environment variable overriding the dataset cache directory.
pub const CACHE_ENV: &str = "DCD_CACHE_DIR";

/// `$DCD_CACHE_DIR`, else `$HOME/.cache/dcdistance`, else
/// `.dcdistance-cache` in the working directory.
pub fn cache_dir() -> PathBuf {
    if let Some(dir) = env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(dir);
    }
    match env::var_os("HOME").filter(|v| !v.is_empty()) {
        Some(home) => Path::new(&home).join(".cache").join("dcdistance"),
        None => PathBuf::from(".dcdistance-cache"),
    }
}

/// Directory holding the extracted `reut2-*.sgm` files.
pub fn reuters_dir(cache: &Path) -> PathBuf {
    cache.join("reuters21578")
}

/// Directory holding `20news-bydate-train` and `20news-bydate-test`.
pub fn newsgroups_dir(cache: &Path) -> PathBuf {
    cache.join("20news-bydate")
}

pub fn reuters_available(cache: &Path) -> bool {
    std::fs::read_dir(reuters_dir(cache))
        .map(|rd| {
            rd.filter_map(|e| e.ok())
                .any(|e| e.file_name().to_string_lossy().starts_with("reut2-"))
        })
        .unwrap_or(false)
}

pub fn newsgroups_available(cache: &Path) -> bool {
    let dir = newsgroups_dir(cache);
    dir.join("20news-bydate-train").is_dir() && dir.join("20news-bydate-test").is_dir()
}
