use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid of {gridsize} points aliases a field with nmax = {nmax} (need gridsize > {})", 2 * nmax)]
    Aliasing { gridsize: usize, nmax: usize },

    #[error("product window {required} exceeds cap {cap} and no truncation rule is configured")]
    WindowOverflow { required: usize, cap: usize },

    #[error("frequency {n} lies outside the window |n| <= {nmax}")]
    OutsideWindow { n: i64, nmax: usize },

    #[error("no stored sample at t = {t}")]
    MissingSample { t: f64 },

    #[error("near-resonant correction: denominator {denominator:e} below 1e-6")]
    NearResonance { denominator: f64 },

    #[error("mode system diverged (non-finite state) at t = {t}")]
    Divergence { t: f64 },

    #[error("solver blow-up (non-finite field) at t = {t}")]
    Blowup { t: f64 },

    #[error("relative mass drift {drift:e} exceeds {limit:e} at t = {t}")]
    AccuracyFailure { t: f64, drift: f64, limit: f64 },

    #[error("Hamiltonian changed sign ({initial:e} -> {current:e}) at t = {t}")]
    HamiltonianAnomaly { t: f64, initial: f64, current: f64 },

    #[error("split-step sign convention check failed: plane-wave mismatch {mismatch:e}")]
    Convention { mismatch: f64 },

    #[error("direct and rescaled evolutions differ by {mismatch:e} in L2 (tolerance {tolerance:e})")]
    RescalingMismatch { mismatch: f64, tolerance: f64 },

    #[error("no admissible N <= {cap}; about N = {required:.6e} would be required")]
    Infeasible { cap: u64, required: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
