use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series does not converge: {0}")]
    Convergence(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("index error: {0}")]
    Index(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("Hamiltonian is not diagonal (max off-diagonal magnitude {0:e})")]
    NonDiagonal(f64),

    #[error("matrix element <{row}|O|{col}> vanishes; phase is undefined")]
    ZeroElement { row: usize, col: usize },

    #[error("phase unwrap failed for curve {label}: grid step {step} exceeds pi / {rate}")]
    Unwrap { label: String, step: f64, rate: f64 },
}

impl QError {
    /// Short machine-readable tag, used in CLI error records and FFI status codes.
    pub fn kind(&self) -> &'static str {
        match self {
            QError::Domain(_) => "domain",
            QError::Convergence(_) => "convergence",
            QError::Dimension(_) => "dimension",
            QError::Index(_) => "index",
            QError::Truncation(_) => "truncation",
            QError::NonDiagonal(_) => "non_diagonal",
            QError::ZeroElement { .. } => "zero_element",
            QError::Unwrap { .. } => "unwrap",
        }
    }
}

pub type Result<T> = std::result::Result<T, QError>;
