use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, IsacError>;

#[derive(Debug, Error)]
pub enum IsacError {
    /// Invalid or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Power fractions exceed the transmit budget.
    #[error("power budget exceeded: fractions sum to {0}")]
    PowerBudget(f64),

    /// A matrix that must be Hermitian positive definite is not, or a
    /// factorization failed.
    #[error("numerical domain error: {0}")]
    Numerical(String),

    /// The sensing direction vanishes after projection onto the nullspace.
    #[error("sensing direction lies in nulled subspace (residual {residual:.3e} of input norm)")]
    NulledSensingDirection { residual: f64 },

    /// The brute-force oracle did not converge to its tolerance.
    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl IsacError {
    /// Process exit code used by the CLI: 1 for configuration and I/O
    /// problems, 2 for numerical-domain failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            IsacError::Config(_)
            | IsacError::PowerBudget(_)
            | IsacError::Io { .. }
            | IsacError::Csv(_) => 1,
            IsacError::Numerical(_)
            | IsacError::NulledSensingDirection { .. }
            | IsacError::Oracle(_) => 2,
        }
    }
}
