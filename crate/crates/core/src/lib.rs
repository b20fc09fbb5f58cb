//! Issue triage toolkit.
//!
//! Assigns software issues to team roles (developer, tester, designer,
//! leader) and developer seniority levels (senior, mid, junior) from
//! tracker exports. The crate covers the full experimental pipeline:
//!
//! - [`corpus`]: ingestion of tracker CSV exports, missing-value
//!   normalization, task datasets, stratified fold plans.
//! - [`textprep`]: tokenization, a rule-based POS tagger, and a lexicon
//!   sentiment scorer behind pluggable interfaces.
//! - [`features`]: the curated feature vector built from tracker columns
//!   and issue text, plus bag-of-words and TF-IDF baselines.
//! - [`learners`]: shallow classifiers and ensembles (naive Bayes, linear
//!   models, kNN, CART trees, forests, boosting, voting, stacking, MLP)
//!   behind one fit/predict/predict-probability contract.
//! - [`eval`]: cross-validated evaluation, grid search, coefficient-based
//!   feature importance, and the 5x2cv F-test for model comparison.
//! - [`synth`]: a seeded synthetic corpus generator for benchmarks and
//!   end-to-end tests.
//!
//! Numeric code is generic over the [`Scalar`] floating-point type
//! (`f32` or `f64`); the aliases below fix the default `f64` instantiation.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod learners;
pub mod scalar;
pub mod synth;
pub mod textprep;

pub use error::{Result, TriageError};
pub use scalar::Scalar;

/// Default scalar type for the concrete aliases.
pub type Real = f64;

/// Feature matrix over the default scalar.
pub type Matrix = features::FeatureMatrix<Real>;
/// Feature matrix over `f32`.
pub type Matrix32 = features::FeatureMatrix<f32>;
/// Trained classifier over the default scalar.
pub type Model = learners::ClassifierModel<Real>;
/// Metrics report over the default scalar.
pub type Metrics = eval::MetricsReport<Real>;
