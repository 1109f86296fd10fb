use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    Domain { op: &'static str, detail: String },
    /// Two inputs that must agree in size do not.
    DimensionMismatch { op: &'static str, expected: usize, found: usize },
    /// Not enough data for the estimator.
    TooShort { op: &'static str, needed: usize, found: usize },
    /// A matrix that must be positive semi-definite has a significantly
    /// negative eigenvalue.
    NotPositiveSemidefinite { min_eigenvalue: f64, max_eigenvalue: f64 },
    /// The requested cross-covariance cannot be realized together with the
    /// requested auto-covariances.
    Infeasible { min_eigenvalue: f64, scale: f64 },
    /// A linear system is singular or too badly conditioned to solve.
    Singular { op: &'static str, condition: f64 },
    /// Lag outside the `k <= N/10` estimator guard.
    LagTooLarge { lag: usize, limit: usize },
    /// Iterative solver exhausted its iteration budget.
    NoConvergence { op: &'static str, iterations: usize },
    /// Non-finite value produced by a Monte Carlo average.
    Overflow { op: &'static str, trial: usize },
    /// Input data degenerate for the operation (constant regressor, zero target).
    Degenerate { op: &'static str, detail: &'static str },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { op, detail: detail.into() }
    }

    pub(crate) fn check_len(op: &'static str, expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { op, expected, found })
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { op, detail } => write!(f, "{op}: domain error: {detail}"),
            Error::DimensionMismatch { op, expected, found } => {
                write!(f, "{op}: dimension mismatch (expected {expected}, found {found})")
            }
            Error::TooShort { op, needed, found } => {
                write!(f, "{op}: needs at least {needed} samples, got {found}")
            }
            Error::NotPositiveSemidefinite { min_eigenvalue, max_eigenvalue } => write!(
                f,
                "matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:e}, max {max_eigenvalue:e})"
            ),
            Error::Infeasible { min_eigenvalue, scale } => write!(
                f,
                "cross-covariance infeasible: C_x1 - K K^T has eigenvalue {min_eigenvalue:e} (scale {scale:e})"
            ),
            Error::Singular { op, condition } => {
                write!(f, "{op}: singular system (condition estimate {condition:e})")
            }
            Error::LagTooLarge { lag, limit } => {
                write!(f, "lag {lag} exceeds the estimator guard k <= {limit}")
            }
            Error::NoConvergence { op, iterations } => {
                write!(f, "{op}: no convergence after {iterations} iterations")
            }
            Error::Overflow { op, trial } => write!(f, "{op}: non-finite value at trial {trial}"),
            Error::Degenerate { op, detail } => write!(f, "{op}: degenerate input: {detail}"),
        }
    }
}

impl core::error::Error for Error {}
