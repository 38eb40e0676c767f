//! Bug / non-bug classification of issue-tracker reports.
//!
//! Reports are reduced to a fused feature row: TF-IDF scores of the
//! categorical fields (product, component, reporter, severity and the
//! reporter's intention) next to an embedding of the preprocessed summary.
//! Five classical classifiers are trained on those rows and compared with
//! stratified cross-validation.

pub mod classifiers;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod pipeline;
pub mod preprocess;
pub mod seed;

pub use corpus::{BugReport, CategoricalField, Dataset, Intention, Label, UnlabeledReport};
pub use error::{Error, Result};
pub use features::{FeatureConfig, FeatureMatrix, FeatureMode};
pub use pipeline::TrainedPipeline;
