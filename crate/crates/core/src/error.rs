use thiserror::Error;

use crate::analysis::FitResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not Hermitian (max |H - H†| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error(
        "quadrature did not converge: last change {last_change:e} > tolerance {tolerance:e} \
         at resolution {n_theta}x{n_phi}x{n_psi}"
    )]
    QuadratureNotConverged {
        last_change: f64,
        tolerance: f64,
        n_theta: usize,
        n_phi: usize,
        n_psi: usize,
        estimate: f64,
    },

    #[error("fit did not converge after {starts} starts (best rss {:e})", best.residual_rss)]
    FitNotConverged { starts: usize, best: Box<FitResult> },

    #[error("profile is not normalizable: {0}")]
    NonNormalizable(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag used in diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidFrame(_) => "invalid_frame",
            Error::InvalidInput(_) => "invalid_input",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::QuadratureNotConverged { .. } => "quadrature_not_converged",
            Error::FitNotConverged { .. } => "fit_not_converged",
            Error::NonNormalizable(_) => "non_normalizable",
            Error::Csv(_) => "csv",
        }
    }
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidInput(msg()))
    }
}
