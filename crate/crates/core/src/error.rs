use simop_oracle::OracleError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("partition mismatch: {0}")]
    PartitionMismatch(String),
    #[error("I+X is not invertible to tolerance (condition estimate {condition:e})")]
    NotInvertible { condition: f64 },
    #[error("weight vanishes on group label {label}; the weighted space is degenerate")]
    DegenerateWeight { label: i64 },
    #[error("no admissible {what} inside the window (best value {best:e})")]
    WindowTooSmall { what: &'static str, best: f64 },
    #[error("contraction certificate fails: q = {q:e} is not below 1")]
    ContractionViolation { q: f64 },
    #[error("no convergence after {iterations} iterations (last ratio {last_ratio:e})")]
    NonConvergence { iterations: usize, last_ratio: f64 },
    #[error("condition fails: lhs {lhs:e} is not below rhs {rhs:e}")]
    ConditionViolation { lhs: f64, rhs: f64 },
    #[error("not supported: {0}")]
    NotSupported(String),
    #[error("free operator assumption fails: {0}")]
    AssumptionViolation(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("oracle failure: {0}")]
    Oracle(#[from] OracleError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        Error::PartitionMismatch(msg.into())
    }

    /// True for failures of a mathematical precondition of the method, as
    /// opposed to bad input or broken tooling.
    pub fn is_method_condition(&self) -> bool {
        matches!(
            self,
            Error::NotInvertible { .. }
                | Error::DegenerateWeight { .. }
                | Error::WindowTooSmall { .. }
                | Error::ContractionViolation { .. }
                | Error::NonConvergence { .. }
                | Error::ConditionViolation { .. }
                | Error::NotSupported(_)
                | Error::AssumptionViolation(_)
        )
    }
}
