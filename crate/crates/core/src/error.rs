use std::path::PathBuf;

/// Errors produced by the spectral, kernel, dynamics and fitting routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("frequency must be positive, got {0} eV")]
    NonPositiveFrequency(f64),

    #[error("Green's coefficients unavailable at z = {z_nm} nm, omega = {omega_ev} eV")]
    CoefficientsUnavailable { z_nm: f64, omega_ev: f64 },

    #[error("unphysical Purcell factor {value} at omega = {omega_ev} eV (coefficient data inconsistent)")]
    UnphysicalPurcell { omega_ev: f64, value: f64 },

    #[error("spectrum support too narrow: edge integrand ratio {ratio:.3} exceeds {tolerance}")]
    SupportTooNarrow { ratio: f64, tolerance: f64 },

    #[error("kernel quadrature not converged: grid refinement changed K by {change:.3e} (tolerance {tolerance:.3e})")]
    KernelNotConverged { change: f64, tolerance: f64 },

    #[error("input is not converged: {0}")]
    Unconverged(String),

    #[error("malformed spectrum: {0}")]
    MalformedSpectrum(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("fit residual mismatch: optimizer reported {reported:.3e}, recomputed {recomputed:.3e}")]
    ResidualMismatch { reported: f64, recomputed: f64 },

    #[error("empty fit window")]
    EmptyWindow,

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: line {line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
