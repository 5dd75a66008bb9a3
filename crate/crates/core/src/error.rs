use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("row {row}: {reason}")]
    InvalidRow { row: usize, reason: String },

    #[error("alphabet mismatch: {left} vs {right} letters")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty sequence")]
    EmptySequence,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no convergence after {iterations} iterations (certificate gap {gap:e})")]
    NotConverged { iterations: usize, gap: f64 },

    #[error("alphabet too large for brute-force search: {0}")]
    AlphabetTooLarge(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("experiment outside the preamble-failure regime: alpha {alpha} is below eta * training constant = {threshold}")]
    RegimeViolated { alpha: f64, threshold: f64 },

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDistribution(_) => "invalid_distribution",
            Error::InvalidRow { .. } => "invalid_row",
            Error::AlphabetMismatch { .. } => "alphabet_mismatch",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::EmptySequence => "empty_sequence",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NotConverged { .. } => "not_converged",
            Error::AlphabetTooLarge(_) => "alphabet_too_large",
            Error::BudgetExceeded(_) => "budget_exceeded",
            Error::RegimeViolated { .. } => "regime_violated",
            Error::Parse(_) => "parse",
        }
    }
}
