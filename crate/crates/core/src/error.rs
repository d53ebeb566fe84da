use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Two atoms or points coincide where a logarithmic kernel needs them distinct.
    #[error("singular configuration: {0}")]
    Singularity(String),

    /// `p == q` in the intersection threshold; the formal value is `fallback`.
    #[error("degenerate exponents p = q = {p}: threshold is trivially {fallback}")]
    DegenerateExponents { p: f64, fallback: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("eigen-solver failed to converge on tridiagonal matrix (diag = {diag:?}, offdiag = {offdiag:?})")]
    EigenSolver { diag: Vec<f64>, offdiag: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite, got {x}")))
    }
}

pub(crate) fn ensure_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite and > 0, got {x}")))
    }
}
