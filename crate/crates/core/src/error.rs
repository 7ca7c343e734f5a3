use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the solvers and their input validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    /// The coefficient of the second time derivative dropped below the
    /// configured floor; the equation is about to lose its wave character.
    #[error("degeneracy at t = {time:e} s, node {node}: 1 - kappa*u = {margin:.6} < {floor}")]
    Degeneracy {
        time: f64,
        node: usize,
        margin: f64,
        floor: f64,
    },

    #[error("Picard iteration did not converge at t = {time:e} s after {iterations} iterations (last update {update:e})")]
    PicardDivergence {
        time: f64,
        iterations: usize,
        update: f64,
    },

    #[error("singular operator: pivot {pivot:e} at row {row}")]
    SingularOperator { row: usize, pivot: f64 },

    #[error("multiharmonic fixed point did not contract after {iterations} iterations (last update {update:e})")]
    NonContraction { iterations: usize, update: f64 },

    #[error("normal equations are ill-conditioned: {0}")]
    IllConditioned(String),
}

impl Error {
    /// Short machine-readable tag, used in error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::Degeneracy { .. } => "Degeneracy",
            Error::PicardDivergence { .. } => "PicardDivergence",
            Error::SingularOperator { .. } => "SingularOperator",
            Error::NonContraction { .. } => "NonContraction",
            Error::IllConditioned(_) => "IllConditioned",
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn check_len(what: &'static str, got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            got,
            expected,
        })
    }
}
