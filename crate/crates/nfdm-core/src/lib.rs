//! Numerical laboratory for nonlinear-frequency-division transmission over
//! dispersion-unmanaged fiber: Zakharov–Shabat scattering transforms, a
//! split-step NLSE channel with EDFA noise, the QAM/OFDM modems, and the
//! transceiver DSP that ties them together.
//!
//! Everything numeric is generic over [`Scalar`] (f32 or f64); the aliases
//! at the crate root fix f64 for ordinary use.

pub mod channel;
pub mod error;
pub mod fourier;
pub mod frame;
pub mod impairments;
pub mod inft;
pub mod metrics;
pub mod nft;
pub mod ofdm;
pub mod qam;
pub mod scalar;
pub mod signal;
pub mod spectrum;
pub mod txrx;
pub mod units;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// f64 concrete aliases for the main data types.
pub type Complex = num_complex::Complex<f64>;
pub type TimeSignal = signal::TimeSignal<f64>;
pub type NonlinearSpectrum = spectrum::NonlinearSpectrum<f64>;
pub type LinkConfig = channel::LinkConfig<f64>;
pub type StepControl = channel::StepControl<f64>;
pub type FrameConfig = frame::FrameConfig<f64>;
pub type Normalization = units::Normalization<f64>;
pub type TimeGrid = inft::TimeGrid<f64>;
pub type ImpairmentConfig = impairments::ImpairmentConfig<f64>;
