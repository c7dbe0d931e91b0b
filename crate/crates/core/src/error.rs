use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("family is linearly dependent at index {index} (pivot {pivot:e} vs leading {leading:e})")]
    LinearDependence { index: usize, pivot: f64, leading: f64 },

    #[error("matrix is rank deficient: {0}")]
    Rank(String),

    #[error("no convergence after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("family is not normalized: {0}")]
    Normalization(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("inconsistent moments: {0}")]
    InconsistentMoments(String),

    #[error("invalid Gram matrix: {0}")]
    InvalidGram(String),

    #[error("cloud of {m} points exceeds the exact solver cap of {cap}; use the sliced estimator")]
    Size { m: usize, cap: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing required key(s): {}", .0.join(", "))]
    MissingKeys(Vec<String>),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
