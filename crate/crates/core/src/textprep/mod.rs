//! Tokenization, stopword removal and stemming.

mod porter;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use porter::porter_stem;

const SMART_STOPLIST: &str = include_str!("../../data/smart_stoplist.txt");

/// Lowercases `text` and splits it on every character outside `a-z`.
///
/// Digits act as separators, so purely numeric fragments vanish.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_ascii_alphabetic() {
            cur.push(c.to_ascii_lowercase());
        } else if !cur.is_empty() {
            tokens.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stoplist {
    terms: BTreeSet<String>,
}

impl Stoplist {
    pub fn empty() -> Self {
        Stoplist::default()
    }

    /// The bundled SMART English stoplist.
    pub fn smart() -> Self {
        Self::parse(SMART_STOPLIST)
    }

    /// One term per line; `#` starts a comment. Terms are lowercased.
    pub fn parse(content: &str) -> Self {
        let terms = content
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::to_lowercase)
            .collect();
        Stoplist { terms }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::Ingestion {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Ok(Self::parse(&content))
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.contains(term)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

pub fn remove_stopwords(tokens: Vec<String>, stoplist: &Stoplist) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| !stoplist.contains(t))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub id: String,
    pub tokens: Vec<String>,
}

/// Tokenize, then drop stopwords, then stem.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    pub stoplist: Stoplist,
    pub stem: bool,
}

impl Default for Preprocessor {
    fn default() -> Self {
        Preprocessor {
            stoplist: Stoplist::smart(),
            stem: true,
        }
    }
}

impl Preprocessor {
    pub fn process(&self, text: &str) -> Vec<String> {
        let tokens = remove_stopwords(tokenize(text), &self.stoplist);
        if self.stem {
            tokens
                .iter()
                .map(|t| porter_stem(t))
                .filter(|t| !t.is_empty())
                .collect()
        } else {
            tokens
        }
    }

    pub fn process_doc(&self, id: &str, text: &str) -> TokenizedDoc {
        TokenizedDoc {
            id: id.to_string(),
            tokens: self.process(text),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tokenize("The cats, running FAST!"),
            ["the", "cats", "running", "fast"]
        );
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("IBM-PC 486dx"), ["ibm", "pc", "dx"]);
        assert_eq!(tokenize("don't 1999"), ["don", "t"]);
    }

    #[test]
    fn stopword_examples() {
        let smart = Stoplist::smart();
        let toks = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(
            remove_stopwords(toks(&["the", "cats", "running"]), &smart),
            ["cats", "running"]
        );
        assert_eq!(
            remove_stopwords(toks(&["the", "cats"]), &Stoplist::empty()),
            ["the", "cats"]
        );
        assert!(remove_stopwords(toks(&["the", "a", "of"]), &smart).is_empty());
    }

    #[test]
    fn smart_list_shape() {
        let s = Stoplist::smart();
        assert_eq!(s.len(), 570);
        assert!(s.contains("the") && s.contains("zero") && !s.contains("oil"));
    }

    #[test]
    fn custom_stoplist_comments() {
        let s = Stoplist::parse("# header\nFoo\nbar # trailing\n\n");
        assert_eq!(s.len(), 2);
        assert!(s.contains("foo") && s.contains("bar"));
    }

    #[test]
    fn pipeline_order() {
        let p = Preprocessor::default();
        assert_eq!(p.process("The ponies were running"), ["poni", "run"]);
    }

    proptest! {
        #[test]
        fn tokens_are_lowercase_ascii(text in "\\PC{0,80}") {
            for t in tokenize(&text) {
                prop_assert!(!t.is_empty());
                prop_assert!(t.bytes().all(|c| c.is_ascii_lowercase()));
            }
        }

        #[test]
        fn stopword_removal_is_idempotent(words in prop::collection::vec("[a-z]{1,6}", 0..30)) {
            let s = Stoplist::smart();
            let once = remove_stopwords(words, &s);
            prop_assert_eq!(remove_stopwords(once.clone(), &s), once);
        }
    }
}
