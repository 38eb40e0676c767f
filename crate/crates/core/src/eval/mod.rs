//! Metrics, cross-validation, the feature-mode ablation, synthetic corpora
//! and report files.

mod ablation;
mod cv;
mod metrics;
pub mod report;
pub mod synth;

pub use ablation::{run_ablation, AblationCell, AblationConfig, AblationInput, AblationTable};
pub use cv::{
    cross_validate, cross_validate_observed, fit_features, CvResult, FitObserver, FitStage, FittedFeatures, FoldResult,
    PreparedDataset,
};
pub use metrics::{confusion, metrics, ConfusionMatrix, Metrics, Undefined};
pub use report::{render_report, render_table, MetricName};
pub use synth::{generate_synthetic, SynthSpec};
