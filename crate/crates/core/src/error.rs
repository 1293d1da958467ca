use thiserror::Error;

use crate::stats::EstimateSummary;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row sums total {rows} but column sums total {cols}")]
    MarginMismatch { rows: u64, cols: u64 },

    #[error("integer overflow while evaluating {0}")]
    Overflow(&'static str),

    #[error("column sum {col} exceeds the number of rows {rows}")]
    ColumnExceedsRows { col: usize, rows: usize },

    #[error("invalid conditional-Poisson distribution: {0}")]
    InvalidDistribution(String),

    #[error("subset has {got} units, expected {expected}")]
    WrongSubsetSize { expected: usize, got: usize },

    #[error("subset index {index} is out of range or repeated")]
    InvalidSubset { index: usize },

    #[error("only {active} rows have positive residual, column needs {needed}")]
    InsufficientActiveRows { active: usize, needed: usize },

    #[error("brute-force enumeration over {cells} cells exceeds the limit of 25")]
    TooLarge { cells: usize },

    #[error("dynamic program exceeded its memo budget of {budget} states")]
    StateSpaceExceeded { budget: usize },

    #[error("state has no completion (u(s, ρ) = 0)")]
    DeadState,

    #[error("every replication failed; the estimate is zero")]
    AllFailed(Box<EstimateSummary>),

    #[error("empirical large-deviation rate {rate:e} is degenerate")]
    RateDegenerate { rate: f64 },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("no feasible instance after {attempts} attempts")]
    GenerationExhausted { attempts: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Stable machine-readable identifier, used by the CLI's JSON errors.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MarginMismatch { .. } => "MarginMismatch",
            Error::Overflow(_) => "Overflow",
            Error::ColumnExceedsRows { .. } => "ColumnExceedsRows",
            Error::InvalidDistribution(_) => "InvalidDistribution",
            Error::WrongSubsetSize { .. } => "WrongSubsetSize",
            Error::InvalidSubset { .. } => "InvalidSubset",
            Error::InsufficientActiveRows { .. } => "InsufficientActiveRows",
            Error::TooLarge { .. } => "TooLarge",
            Error::StateSpaceExceeded { .. } => "StateSpaceExceeded",
            Error::DeadState => "DeadState",
            Error::AllFailed(_) => "AllFailed",
            Error::RateDegenerate { .. } => "RateDegenerate",
            Error::InsufficientSamples { .. } => "InsufficientSamples",
            Error::GenerationExhausted { .. } => "GenerationExhausted",
            Error::InvalidParameter(_) => "InvalidParameter",
        }
    }
}
