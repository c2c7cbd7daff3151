//! Error type shared by the whole crate. Most numerical routines return
//! `Result<_, Error>`; warnings that shouldn't abort a run (solitonic energy,
//! aliasing) are separate types returned alongside values.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("config: {0}")]
    Config(String),

    /// Scattering coefficient a(ξ) vanished (or nearly so). b/a division is
    /// meaningless there; for solitonless signals this indicates the signal
    /// left the regime the transceiver is designed for.
    #[error("near-singular scattering: |a({xi})| = {a_abs:.3e} below 1e-12")]
    NearSingularScattering { xi: f64, a_abs: f64 },

    /// Iterative synthesis did not reach the requested residual. Carries the
    /// best residual achieved so the caller can decide whether it is usable.
    #[error(
        "synthesis did not converge: residual {achieved:.3e} after {iterations} iterations (tolerance {tolerance:.1e})"
    )]
    Convergence {
        achieved: f64,
        tolerance: f64,
        iterations: usize,
    },

    /// Power calibration target is outside what the amplitude bracket can
    /// produce.
    #[error("target power {target_dbm:.2} dBm outside achievable range [{lo_dbm:.2}, {hi_dbm:.2}] dBm")]
    PowerRange {
        target_dbm: f64,
        lo_dbm: f64,
        hi_dbm: f64,
    },

    #[error("unsupported operating regime: {0}")]
    UnsupportedRegime(String),

    /// Preamble correlation did not produce a credible peak — wrong signal,
    /// no signal, or SNR far below operating range.
    #[error("synchronization failed: correlation metric {metric:.3} below {threshold}")]
    SyncFailure { metric: f64, threshold: f64 },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed waveform file: {0}")]
    WaveformFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
