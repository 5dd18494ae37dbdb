//! Validation metrics, family reports and the randomized sensitivity harness.

pub mod consistency;
pub mod forest;
pub mod metrics;
mod report;
pub mod sensitivity;
pub mod signal;
pub mod stats;

pub use consistency::{degree_consistency, feature_consistency, structure_consistency};
pub use forest::{ForestConfig, RandomForest};
pub use metrics::{degree_tail_ratio_99, graph_homophily, macro_f1, prob_matrix_deviation};
pub use report::{
    validate_family, DeviationTarget, GraphRecord, MetricSummary, ValidationOptions, ValidationReport,
};
pub use sensitivity::{run_sensitivity, SensitivityConfig, SensitivityResult};
pub use signal::{signal_strength, structure_features, Signal};
