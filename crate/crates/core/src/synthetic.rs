//! Seeded synthetic corpora with disjoint class keyword pools.
//!
//! Every document mixes words from its own class pool with words from a
//! vocabulary shared by all classes. Words are built from letters only, so
//! they survive tokenization, and use prefixes absent from the stoplist.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, LabeledCorpus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub n_classes: usize,
    pub docs_per_class: usize,
    pub keywords_per_class: usize,
    pub noise_vocabulary: usize,
    pub doc_len: usize,
    /// Share of each document's tokens drawn from the shared vocabulary.
    pub noise_fraction: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_classes: 3,
            docs_per_class: 100,
            keywords_per_class: 40,
            noise_vocabulary: 120,
            doc_len: 40,
            noise_fraction: 0.5,
            seed: 42,
        }
    }
}

fn letters(mut n: usize, width: usize) -> String {
    let mut s = vec![b'a'; width];
    for slot in s.iter_mut().rev() {
        *slot = b'a' + (n % 26) as u8;
        n /= 26;
    }
    String::from_utf8(s).expect("ascii")
}

/// Keyword `j` of class `c`.
pub fn keyword(c: usize, j: usize) -> String {
    format!("kw{}x{}", letters(c, 2), letters(j, 3))
}

pub fn noise_word(j: usize) -> String {
    format!("nzx{}", letters(j, 3))
}

pub fn generate(cfg: &SyntheticConfig) -> Result<LabeledCorpus> {
    if cfg.n_classes == 0
        || cfg.docs_per_class == 0
        || cfg.keywords_per_class == 0
        || cfg.doc_len == 0
    {
        return Err(Error::Config(
            "synthetic corpus sizes must be positive".into(),
        ));
    }
    if !(0.0..1.0).contains(&cfg.noise_fraction) {
        return Err(Error::Config(format!(
            "noise_fraction must be in [0, 1), got {}",
            cfg.noise_fraction
        )));
    }
    if cfg.noise_fraction > 0.0 && cfg.noise_vocabulary == 0 {
        return Err(Error::Config(
            "noise_fraction > 0 needs a noise vocabulary".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut docs = Vec::with_capacity(cfg.n_classes * cfg.docs_per_class);
    for i in 0..cfg.docs_per_class {
        for c in 0..cfg.n_classes {
            let words: Vec<String> = (0..cfg.doc_len)
                .map(|_| {
                    if rng.random_bool(cfg.noise_fraction) {
                        noise_word(rng.random_range(0..cfg.noise_vocabulary))
                    } else {
                        keyword(c, rng.random_range(0..cfg.keywords_per_class))
                    }
                })
                .collect();
            docs.push(Document::new(
                format!("c{c}/{i:05}"),
                words.join(" "),
                format!("class{c}"),
            ));
        }
    }
    LabeledCorpus::new(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::Preprocessor;

    #[test]
    fn shape_and_determinism() {
        let cfg = SyntheticConfig::default();
        let a = generate(&cfg).unwrap();
        assert_eq!(a.len(), 300);
        assert_eq!(a.class_sizes(), [100, 100, 100]);
        assert_eq!(a.docs(), generate(&cfg).unwrap().docs());
        let other = generate(&SyntheticConfig { seed: 7, ..cfg }).unwrap();
        assert_ne!(a.docs(), other.docs());
    }

    #[test]
    fn pools_survive_preprocessing_and_stay_disjoint() {
        let p = Preprocessor::default();
        let mut seen = std::collections::HashMap::new();
        for c in 0..3 {
            for j in 0..40 {
                let stem = p.process(&keyword(c, j));
                assert_eq!(stem.len(), 1, "{}", keyword(c, j));
                if let Some(prev) = seen.insert(stem[0].clone(), c) {
                    assert_eq!(prev, c);
                }
            }
        }
        for j in 0..120 {
            let stem = p.process(&noise_word(j));
            assert_eq!(stem.len(), 1);
            assert!(!seen.contains_key(&stem[0]));
        }
    }

    #[test]
    fn rejects_bad_config() {
        let bad = SyntheticConfig {
            noise_fraction: 1.0,
            ..SyntheticConfig::default()
        };
        assert!(generate(&bad).is_err());
    }
}
