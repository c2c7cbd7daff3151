//! Whole-transceiver round trip over the dimensionless-equivalent plant:
//! modulate onto the nonlinear spectrum, pre-compensate half the channel
//! rotation, push the physical waveform down 975.6 km of path-averaged
//! lossless fiber with the split-step solver, then invert at the receiver.
//! With noise switched off the symbol error is pure implementation error —
//! synthesis residual, scattering discretization, resampling — and must sit
//! far below any operating SNR.

use nfdm_core::channel::{run_link, LinkConfig, LinkMode, StepControl};
use nfdm_core::frame::design_presets;
use nfdm_core::metrics::evm_db;
use nfdm_core::qam;
use nfdm_core::txrx::NfdmModem;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn random_symbols(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits: Vec<u8> = (0..n * qam::BITS_PER_SYMBOL)
        .map(|_| rng.gen_range(0..=1))
        .collect();
    qam::map_bits(&bits)
}

#[test]
fn symbols_survive_the_full_link() {
    let link = LinkConfig::<f64>::standard();
    let frame = design_presets::<f64>()[0].frame; // 64 carriers, 2 ns + 4 ns
    let modem = NfdmModem::new(frame, &link, 0.7).unwrap();
    let sent = random_symbols(frame.n_subcarriers, 21);

    let (window, report) = modem.transmit(&sent).unwrap();
    assert!(
        report.residual < 1e-3,
        "pre-distortion residual {:.2e} after {} iterations",
        report.residual,
        report.iterations
    );

    let ctrl = StepControl {
        max_step: 50.0,
        max_nl_phase: 1e-3,
    };
    let (rx, rep) = run_link(&window, &link, LinkMode::PathAveragedLossless, &ctrl, 0).unwrap();
    assert!(!rep.aliasing_warning, "burst spilled past the grid edge");

    let rec = modem.receive(&rx, modem.l_norm).unwrap();
    let evm = evm_db(&rec, &sent);
    assert!(evm < -35.0, "link EVM {evm:.1} dB");

    // the rotation is unitary: per-carrier |q̂| must come through the fiber
    // essentially untouched (drift here means lost/gained spectral energy,
    // e.g. bound-state leakage or step-size trouble)
    for (k, (r, s)) in rec.iter().zip(sent.iter()).enumerate() {
        let drift = (r.norm() / s.norm() - 1.0).abs();
        assert!(
            drift < 0.01,
            "carrier {k}: |q̂| drifted by {:.2}%",
            100.0 * drift
        );
    }
}

#[test]
fn receiver_needs_the_traversed_distance() {
    // same plant, but the receiver told the wrong propagated length: the
    // uncompensated quadratic phase should wreck the constellation. Guards
    // against sign/bookkeeping regressions in the rotation ledger that a
    // happy-path test would sail through.
    let link = LinkConfig::<f64>::standard();
    let frame = design_presets::<f64>()[0].frame;
    let modem = NfdmModem::new(frame, &link, 0.5).unwrap();
    let sent = random_symbols(frame.n_subcarriers, 22);

    let (window, _) = modem.transmit(&sent).unwrap();
    let ctrl = StepControl {
        max_step: 50.0,
        max_nl_phase: 1e-3,
    };
    let (rx, _) = run_link(&window, &link, LinkMode::PathAveragedLossless, &ctrl, 0).unwrap();

    let right = modem.receive(&rx, modem.l_norm).unwrap();
    let wrong = modem.receive(&rx, 0.0).unwrap();
    let evm_right = evm_db(&right, &sent);
    let evm_wrong = evm_db(&wrong, &sent);
    assert!(evm_right < -35.0, "correct-length EVM {evm_right:.1} dB");
    assert!(
        evm_wrong > -10.0,
        "zero-length EVM {evm_wrong:.1} dB — rotation bookkeeping no longer matters?"
    );
}
