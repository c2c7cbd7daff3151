// scratch: stage-by-stage EVM through the awgn-only path
use nfdm_core::channel::{run_link, LinkMode};
use nfdm_core::metrics::evm_db;
use nfdm_core::qam;
use nfdm_core::spectrum::{build_spectrum, precompensate};
use nfdm_core::txrx::{calibrate_monotone, slot_launch_dbm, NfdmModem};
use nfdm_core::units::{dbm_to_watts, watts_to_dbm};
use nfdm_core::{Complex, LinkConfig, StepControl};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn substream(seed: u64, point: usize, burst: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | burst);
    rng
}

fn main() {
    let mut link = LinkConfig::standard();
    link.n_spans = 1;
    link.total_length = link.span_length;
    link.noise_figure_db = -60.0;
    let frame = nfdm_core::frame::design_presets::<f64>()[0].frame;

    // --- calibration replica ---
    let cal_syms: Vec<Vec<Complex>> = (0..8)
        .map(|b| {
            let mut rng = substream(11, 0, 0x8000_0000 + b as u64);
            let bits: Vec<u8> = (0..64 * 5).map(|_| rng.gen_range(0..=1)).collect();
            qam::map_bits::<f64>(&bits)
        })
        .collect();
    let probe = NfdmModem::new(frame, &link, 1.0).unwrap();
    let grid = probe.slot_grid();
    let slot_dur = frame.t1();
    let raw_dbm = |a: f64| -> nfdm_core::Result<f64> {
        let mut watts = 0.0;
        for syms in &cal_syms {
            let mut spec = build_spectrum(syms, &probe.layout, a, 0, probe.xi_dense.clone())?;
            precompensate(&mut spec, probe.l_norm, probe.precomp_fraction);
            let q = nfdm_core::inft::synthesize_raw(&spec, &grid)?;
            let phys = probe.norm.denormalize(&q);
            watts += phys.energy() / slot_dur;
        }
        Ok(watts_to_dbm(watts / 8.0))
    };
    let a_raw = calibrate_monotone(raw_dbm, -2.0, 1e-3, 32.0, 0.05, 30).unwrap();
    println!("a_raw = {a_raw}");
    let full_dbm = |a: f64| -> nfdm_core::Result<f64> {
        let modem = NfdmModem::new(frame, &link, a)?;
        let mut watts = 0.0;
        for syms in &cal_syms {
            let (window, _) = modem.transmit(syms)?;
            watts += dbm_to_watts(slot_launch_dbm(&window, slot_dur));
        }
        Ok(watts_to_dbm(watts / 8.0))
    };
    let mut a = a_raw;
    for it in 0..5 {
        let m = full_dbm(a).unwrap();
        println!("secant it {it}: a = {a:.6}, measured {m:.3} dBm");
        if (m + 2.0).abs() <= 0.05 {
            break;
        }
        a *= 10f64.powf(-(m + 2.0) / 20.0);
    }
    println!("calibrated a = {a:.6}");

    // --- per-burst scoring replica ---
    let modem = NfdmModem::new(frame, &link, a).unwrap();
    let ctrl = StepControl {
        max_step: 500.0,
        max_nl_phase: 0.05,
    };
    let mut outs = Vec::new();
    for b in 0..4u64 {
        let mut rng = substream(11, 0, b);
        let bits: Vec<u8> = (0..64 * 5).map(|_| rng.gen_range(0..=1)).collect();
        let sent = qam::map_bits::<f64>(&bits);
        let ase_seed = rng.next_u64();
        let (window, rep) = modem.transmit(&sent).unwrap();
        let (thru, _) = run_link(&window, &link, LinkMode::AwgnOnly, &ctrl, ase_seed).unwrap();
        let received = modem.receive(&thru, 0.0).unwrap();
        println!(
            "burst {b}: tx residual {:.2e}, raw evm {:.2} dB",
            rep.residual,
            evm_db(&received, &sent)
        );
        outs.push((sent, received));
    }

    // equalizer replica
    let mut eq = nfdm_core::txrx::Equalizer::new(64);
    eq.ingest_training(&outs[0].0, &outs[0].1);
    let pilots = frame.pilot_positions();
    for (b, (sent, received)) in outs.iter().enumerate().skip(1) {
        let mut y = received.clone();
        let pilot_sent: Vec<Complex> = pilots.iter().map(|&p| sent[p]).collect();
        let theta = eq.equalize(&mut y, &pilots, &pilot_sent);
        println!(
            "burst {b}: equalized evm {:.2} dB (theta {theta:.4})",
            evm_db(&y, sent)
        );
    }
}
