//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data (wrong lengths, non-finite entries, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A spectral or configuration condition required by the model failed.
    #[error("validation error: {0}")]
    Validation(String),

    /// A numerical routine failed to converge or produced non-finite values.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Inconsistent or unsupported configuration choice.
    #[error("configuration error: {0}")]
    Config(String),

    /// Not enough data for a statistical estimate.
    #[error("statistical error: {0}")]
    Statistical(String),

    /// A frequency plan would exceed the cell budget.
    #[error(
        "plan too large: {cells} cells exceed budget {budget}; \
         try spacing >= {suggested_spacing:.6} or radius <= {suggested_radius:.6}"
    )]
    PlanTooLarge {
        cells: usize,
        budget: usize,
        suggested_spacing: f64,
        suggested_radius: f64,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status for the CLI: 1 for rejected inputs, 2 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) => 2,
            _ => 1,
        }
    }
}
