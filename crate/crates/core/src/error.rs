//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by signal bookkeeping, plant construction, the predictor
/// operators, certificate synthesis and the closed-loop simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A signal or history was queried outside its covered domain.
    #[error("query at t = {t} is outside the covered domain [{start}, {end}]")]
    OutOfDomain { t: f64, start: f64, end: f64 },

    /// Unknown catalog entry.
    #[error("no plant named {0:?} in the catalog")]
    UnknownPlant(String),

    /// The Picard contraction factor (nL+1)T is not below one.
    #[error("contraction factor rho = {rho} >= 1; increase the sub-interval count m")]
    ContractionViolated { rho: f64 },

    /// A matrix required to be Hurwitz is not.
    #[error("matrix is not Hurwitz (spectral abscissa {abscissa})")]
    NotHurwitz { abscissa: f64 },

    /// A Lyapunov equation had no usable solution.
    #[error("Lyapunov solve failed: {0}")]
    LyapunovSolve(String),

    /// Scenario configuration rejected.
    #[error("configuration error: {0}")]
    Config(String),

    /// The simulated state left the guard region; the partial trace covers
    /// everything up to the last finite step.
    #[error("state diverged at t = {t}")]
    Divergence {
        t: f64,
        trace: Box<crate::simulator::SimTrace>,
    },

    /// An exponential fit was requested on an all-zero window.
    #[error("decay fit undefined: no strictly positive samples in the window")]
    UndefinedFit,
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
