//! Supervised text feature extraction based on the distance between a
//! document and a representative vector of every class.
//!
//! The crate covers the whole experimental pipeline: corpus loading and
//! cross-validation folds, tokenization with stopword removal and Porter
//! stemming, TF-IDF vectorization, the distance-to-class transform, filter
//! feature-selection baselines (IG, chi-squared, IGFSS, VGFSS), kNN and
//! nearest-centroid classifiers, and fold-level evaluation.

pub mod classify;
pub mod corpus;
pub mod datasets;
pub mod dcdistance;
pub mod error;
pub mod eval;
pub mod featselect;
pub mod io;
pub mod sparse;
pub mod synthetic;
pub mod textprep;
pub mod vectorizer;

pub use error::{Error, Result};
