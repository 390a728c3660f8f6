//! Error type shared by every module.

use thiserror::Error;

/// Errors raised by the simulator.
///
/// Variants are split along the CLI exit-code taxonomy: [`Error::is_config`]
/// errors map to exit code 2, everything else to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A configuration file or override could not be understood.
    #[error("configuration error: {0}")]
    Config(String),

    /// A coefficient ODE left its domain of validity.
    #[error("coefficient divergence: |{name}| exceeded {limit:e} at t = {t}")]
    Divergence { name: &'static str, t: f64, limit: f64 },

    /// A single trajectory produced non-finite amplitudes.
    #[error("trajectory {traj_index} aborted at step {step}: {reason}")]
    TrajectoryAborted {
        traj_index: u64,
        step: usize,
        reason: String,
    },

    /// Too many trajectories of an ensemble aborted.
    #[error("ensemble failed: {aborted} of {total} trajectories aborted (first: {first})")]
    EnsembleFailed {
        aborted: usize,
        total: usize,
        first: String,
    },

    /// A deterministic density matrix stopped being physical.
    #[error("physicality failure at t = {t}: {detail}")]
    Unphysical { t: f64, detail: String },

    /// Two representations that must agree did not.
    #[error("cross-check failed: {0}")]
    CrossCheck(String),

    /// Reading or writing an artifact failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// CSV serialization failed.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the error reflects bad input rather than a numerical failure.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
