//! Experiment harness around `nfdm-core`: plain-text run configs, the
//! power/preset sweep driver with per-point calibration, CSV/plot-data
//! writers, and the oracle selftest suite. The `nfdm-sim` binary is a thin
//! CLI over these modules.

pub mod config;
pub mod experiment;
pub mod results;
pub mod selftest;
