//! Error type shared by every module.

use thiserror::Error;

/// Failures raised by the numerical kernels and the harness.
#[derive(Debug, Error)]
pub enum VpbError {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A spatial cell carries (numerically) no particles.
    #[error("degenerate cell: {0}")]
    DegenerateCell(String),
    /// Moments that cannot come from a nonnegative density.
    #[error("moment consistency: {0}")]
    MomentConsistency(String),
    /// Grids or fields that do not fit together.
    #[error("configuration error: {0}")]
    Configuration(String),
    /// Config file entries that failed validation.
    #[error("{}", ConfigIssue::join(.0))]
    Config(Vec<ConfigIssue>),
    /// An input violating a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Singular systems, non-finite values, failed positivity.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// An iterative method hit its iteration cap.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    /// A time-step restriction was violated.
    #[error("CFL violation: {0}")]
    Cfl(String),
    /// Clipping or runtime budget exceeded.
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// One rejected config entry; line 0 marks a missing key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: usize,
    pub key: String,
    pub reason: String,
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line == 0 {
            write!(f, "config: key '{}': {}", self.key, self.reason)
        } else {
            write!(f, "config line {}: key '{}': {}", self.line, self.key, self.reason)
        }
    }
}

impl ConfigIssue {
    fn join(issues: &[ConfigIssue]) -> String {
        issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
    }
}

pub type Result<T> = std::result::Result<T, VpbError>;
