use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = FockError> = std::result::Result<T, E>;

/// One problem found while parsing or validating a scenario config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub reason: String,
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum FockError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("self-map is not affine (polynomial degree {0})")]
    NonAffinePsi(usize),

    #[error("degree > 2: symbol of degree {0} does not induce a bounded difference")]
    DegreeTooHigh(usize),

    #[error("non-finite integrand value {value} at node {node}")]
    NonFiniteIntegrand { node: usize, value: f64 },

    #[error("singular value decomposition did not converge (dim {0})")]
    SvdNonConvergence(usize),

    #[error("operator kinds differ: {0:?} vs {1:?}")]
    MixedKinds(crate::symbols::OperatorKind, crate::symbols::OperatorKind),

    #[error("operator is not bounded: {0}")]
    UnboundedInput(String),

    #[error("no scenarios")]
    NoScenarios,

    #[error("config invalid: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Config(Vec<ConfigIssue>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl FockError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}
