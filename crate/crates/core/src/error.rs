use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("cap exhausted: {0}")]
    CapExhausted(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("tail unbounded: {0}")]
    TailUnbounded(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("solve stalled: {0}")]
    SolveStalled(String),
    #[error("gain too small: {0}")]
    GainTooSmall(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("mismatch: {0}")]
    Mismatch(String),
}

impl Error {
    /// True for the errors that signal running out of precision or cap.
    pub fn is_precision(&self) -> bool {
        matches!(
            self,
            Error::InsufficientPrecision(_) | Error::CapExhausted(_) | Error::TailUnbounded(_)
        )
    }

    /// Variant name, for machine-readable failure records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "NotPrime",
            Error::InsufficientPrecision(_) => "InsufficientPrecision",
            Error::Domain(_) => "Domain",
            Error::NotInvertible(_) => "NotInvertible",
            Error::CapExhausted(_) => "CapExhausted",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::TailUnbounded(_) => "TailUnbounded",
            Error::Unsupported(_) => "Unsupported",
            Error::SolveStalled(_) => "SolveStalled",
            Error::GainTooSmall(_) => "GainTooSmall",
            Error::Parse { .. } => "Parse",
            Error::Mismatch(_) => "Mismatch",
        }
    }

    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse { pos, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
