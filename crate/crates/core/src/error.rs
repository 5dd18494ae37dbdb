use thiserror::Error;

/// Errors raised while configuring or running the generator.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GenError {
    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsatisfiable homophily h={h}: {reason}")]
    UnsatisfiableHomophily { h: f64, reason: String },

    #[error("density scaling produced a non-finite factor")]
    NonFiniteScale,

    #[error("family generation failed: {failed} of {total} graphs errored")]
    FamilyFailed {
        failed: usize,
        total: usize,
        failures: Vec<GraphFailure>,
    },
}

/// One graph that could not be generated, kept in the family report.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GraphFailure {
    pub graph_index: usize,
    pub message: String,
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> GenError {
    GenError::InvalidConfig {
        field,
        reason: reason.into(),
    }
}

pub type Result<T, E = GenError> = std::result::Result<T, E>;
