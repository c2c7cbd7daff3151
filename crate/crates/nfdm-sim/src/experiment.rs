//! Seeded Monte-Carlo execution of one experiment config: power or
//! subcarrier-count sweeps, NFDM or OFDM, with per-point power calibration,
//! parallel burst processing, equalization, and metric aggregation.
//!
//! Randomness discipline: everything a burst consumes (data bits, ASE,
//! impairment noise) flows from one counter-based substream addressed by
//! (seed, point index, burst index), so bursts can run on any thread in any
//! order and still reproduce bit-for-bit.

use crate::config::{preset_frame, ExperimentConfig, Sweep, System};
use nfdm_core::channel::{run_link, LinkMode};
use nfdm_core::impairments::{apply_rx, apply_tx};
use nfdm_core::metrics::{ber_count, evm_db, gmi_from_llrs, q_from_evm_qam32};
use nfdm_core::ofdm::{apply_edc, scale_to_launch_power, OfdmModem};
use nfdm_core::qam;
use nfdm_core::spectrum::{build_spectrum, precompensate};
use nfdm_core::txrx::{calibrate_monotone, slot_launch_dbm, NfdmModem};
use nfdm_core::units::{dbm_to_watts, watts_to_dbm};
use nfdm_core::{Complex, Error, FrameConfig, Result, TimeSignal};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Calibration bursts live in the upper half of the 32-bit burst-index
/// space so they can never collide with data bursts.
const CAL_STREAM_BASE: u64 = 0x8000_0000;
const CAL_BURSTS: usize = 8;
/// |achieved - target| tolerance for launch-power calibration, dB.
const POWER_TOL_DB: f64 = 0.05;

/// One row of the sweep output. `power_dbm` is the launch-power target the
/// point was calibrated to (preset sweeps share one); `x` is the sweep
/// coordinate (power in dBm, or subcarrier count) for plotting.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub x: f64,
    pub power_dbm: f64,
    pub ber: f64,
    pub q_db: f64,
    pub gmi: f64,
    pub evm_db: f64,
    pub seed: u64,
    pub config_hash: String,
    pub n_bits: usize,
    pub bit_errors: usize,
    /// aggregated error text when the point failed; metrics are NaN then
    pub failed: Option<String>,
}

struct PointSpec {
    idx: usize,
    x: f64,
    frame: FrameConfig,
    target_dbm: f64,
}

struct BurstOut {
    bits: Vec<u8>,
    sent: Vec<Complex>,
    received: Vec<Complex>,
}

struct PointMetrics {
    ber: f64,
    q_db: f64,
    gmi: f64,
    evm_db: f64,
    n_bits: usize,
    bit_errors: usize,
}

fn substream(seed: u64, point: usize, burst: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | burst);
    rng
}

fn draw_bits_symbols(rng: &mut ChaCha8Rng, n_subcarriers: usize) -> (Vec<u8>, Vec<Complex>) {
    let bits: Vec<u8> = (0..n_subcarriers * qam::BITS_PER_SYMBOL)
        .map(|_| rng.gen_range(0..=1u8))
        .collect();
    let syms = qam::map_bits(&bits);
    (bits, syms)
}

fn sweep_points(cfg: &ExperimentConfig) -> Vec<PointSpec> {
    match &cfg.sweep {
        Sweep::PowersDbm(powers) => powers
            .iter()
            .enumerate()
            .map(|(idx, &p)| PointSpec {
                idx,
                x: p,
                frame: cfg.frame,
                target_dbm: p,
            })
            .collect(),
        Sweep::PresetN(ns) => ns
            .iter()
            .enumerate()
            .map(|(idx, &n)| PointSpec {
                idx,
                x: n as f64,
                frame: preset_frame(n).expect("validated at parse time"),
                target_dbm: cfg.fixed_power_dbm,
            })
            .collect(),
    }
}

/// Run the whole experiment. One RunResult per sweep point, in sweep order;
/// a failing point is reported as failed and never aborts its neighbours.
pub fn run_experiment(cfg: &ExperimentConfig) -> Vec<RunResult> {
    let hash = cfg.hash();
    let points = sweep_points(cfg);
    points
        .into_par_iter()
        .map(|pt| {
            let (x, target) = (pt.x, pt.target_dbm);
            match run_point(cfg, &pt) {
                Ok(m) => RunResult {
                    x,
                    power_dbm: target,
                    ber: m.ber,
                    q_db: m.q_db,
                    gmi: m.gmi,
                    evm_db: m.evm_db,
                    seed: cfg.rng_seed,
                    config_hash: hash.clone(),
                    n_bits: m.n_bits,
                    bit_errors: m.bit_errors,
                    failed: None,
                },
                Err(e) => RunResult {
                    x,
                    power_dbm: target,
                    ber: f64::NAN,
                    q_db: f64::NAN,
                    gmi: f64::NAN,
                    evm_db: f64::NAN,
                    seed: cfg.rng_seed,
                    config_hash: hash.clone(),
                    n_bits: 0,
                    bit_errors: 0,
                    failed: Some(e.to_string()),
                },
            }
        })
        .collect()
}

fn run_point(cfg: &ExperimentConfig, pt: &PointSpec) -> Result<PointMetrics> {
    let bursts: Vec<Result<BurstOut>> = match cfg.system {
        System::Nfdm => {
            let amplitude = calibrate_nfdm_amplitude(cfg, pt)?;
            let modem = NfdmModem::new(pt.frame, &cfg.link, amplitude)?;
            (0..cfg.n_bursts)
                .into_par_iter()
                .map(|b| nfdm_burst(cfg, &modem, pt.idx, b))
                .collect()
        }
        System::Ofdm => {
            let modem = OfdmModem::new(pt.frame)?;
            (0..cfg.n_bursts)
                .into_par_iter()
                .map(|b| ofdm_burst(cfg, &modem, pt, b))
                .collect()
        }
    };

    // aggregate burst failures into one point failure (first few messages)
    let mut outs = Vec::with_capacity(bursts.len());
    let mut errors: Vec<String> = Vec::new();
    for r in bursts {
        match r {
            Ok(o) => outs.push(o),
            Err(e) => {
                let msg = e.to_string();
                if !errors.contains(&msg) && errors.len() < 3 {
                    errors.push(msg);
                }
            }
        }
    }
    if !errors.is_empty() {
        return Err(Error::Input(format!(
            "{} of {} bursts failed: {}",
            cfg.n_bursts - outs.len(),
            cfg.n_bursts,
            errors.join(" | ")
        )));
    }
    point_metrics(&pt.frame, &outs)
}

/// Set Eq.-style amplitude A so the synthesized launch power hits the
/// target. Bisect on the raw (non-pre-distorted) synthesis, which is total
/// — it cannot fail at overdriven A the way the iterative transmitter can —
/// then secant-correct against the real pre-distorted transmitter. Power is
/// averaged over a fixed set of calibration bursts.
fn calibrate_nfdm_amplitude(cfg: &ExperimentConfig, pt: &PointSpec) -> Result<f64> {
    let cal_syms: Vec<Vec<Complex>> = (0..CAL_BURSTS)
        .map(|b| {
            let mut rng = substream(cfg.rng_seed, pt.idx, CAL_STREAM_BASE + b as u64);
            draw_bits_symbols(&mut rng, pt.frame.n_subcarriers).1
        })
        .collect();

    let probe = NfdmModem::new(pt.frame, &cfg.link, 1.0)?;
    let grid = probe.window_grid();
    let slot_dur = pt.frame.t1();

    let raw_dbm = |a: f64| -> Result<f64> {
        let mut watts = 0.0;
        for syms in &cal_syms {
            let mut spec =
                build_spectrum(syms, &probe.layout, a, 0, probe.xi_dense.clone())?;
            precompensate(&mut spec, probe.l_norm, probe.precomp_fraction);
            let q = nfdm_core::inft::synthesize_raw(&spec, &grid)?;
            let phys = probe.norm.denormalize(&q);
            watts += phys.energy() / slot_dur;
        }
        Ok(watts_to_dbm(watts / CAL_BURSTS as f64))
    };
    let a_raw = calibrate_monotone(raw_dbm, pt.target_dbm, 1e-3, 32.0, POWER_TOL_DB, 30)?;

    // the pre-distortion shifts burst energy slightly; correct A against the
    // real transmitter (power ≈ A², so dBm is linear in log A)
    let full_dbm = |a: f64| -> Result<f64> {
        let modem = NfdmModem::new(pt.frame, &cfg.link, a)?;
        let mut watts = 0.0;
        for syms in &cal_syms {
            let (window, _) = modem.transmit(syms)?;
            watts += dbm_to_watts(slot_launch_dbm(&window, slot_dur));
        }
        Ok(watts_to_dbm(watts / CAL_BURSTS as f64))
    };
    let mut a = a_raw;
    let mut last_dev = f64::INFINITY;
    for _ in 0..5 {
        let m = full_dbm(a)?;
        let dev = m - pt.target_dbm;
        if dev.abs() <= POWER_TOL_DB {
            return Ok(a);
        }
        last_dev = dev.abs();
        a *= 10f64.powf(-dev / 20.0);
    }
    Err(Error::Convergence {
        achieved: last_dev,
        tolerance: POWER_TOL_DB,
        iterations: 30 + 5,
    })
}

fn nfdm_burst(
    cfg: &ExperimentConfig,
    modem: &NfdmModem<f64>,
    point: usize,
    b: usize,
) -> Result<BurstOut> {
    let mut rng = substream(cfg.rng_seed, point, b as u64);
    let (bits, sent) = draw_bits_symbols(&mut rng, modem.frame.n_subcarriers);
    let ase_seed = rng.next_u64();

    let (window, _report) = modem.transmit(&sent)?;
    let tx = apply_tx(&window, &cfg.impairments, &mut rng)?;
    let (thru, _) = run_link(&tx, &cfg.link, cfg.link_mode, &cfg.step, ase_seed)?;
    let rx = apply_rx(&thru, &cfg.impairments, &mut rng)?;

    let l_trav = match cfg.link_mode {
        LinkMode::AwgnOnly => 0.0,
        _ => modem.l_norm,
    };
    let received = modem.receive(&rx, l_trav)?;
    Ok(BurstOut {
        bits,
        sent,
        received,
    })
}

fn ofdm_burst(
    cfg: &ExperimentConfig,
    modem: &OfdmModem<f64>,
    pt: &PointSpec,
    b: usize,
) -> Result<BurstOut> {
    const WINDOW_FRAMES: usize = 3;
    let mut rng = substream(cfg.rng_seed, pt.idx, b as u64);
    let (bits, sent) = draw_bits_symbols(&mut rng, pt.frame.n_subcarriers);
    let ase_seed = rng.next_u64();

    let total = cfg.link.total_length;
    let burst = modem.modulate_burst(&sent)?;
    let mut window = modem.place_in_window(&burst, WINDOW_FRAMES);
    // 50% pre-EDC, then set the launch power (EDC is unitary, order moot)
    apply_edc(&mut window, &cfg.link, 0.5 * total);
    scale_to_launch_power(&mut window, pt.frame.t1(), dbm_to_watts(pt.target_dbm));

    let tx = apply_tx(&window, &cfg.impairments, &mut rng)?;
    let (thru, _) = run_link(&tx, &cfg.link, cfg.link_mode, &cfg.step, ase_seed)?;
    let mut rx = apply_rx(&thru, &cfg.impairments, &mut rng)?;

    // undo whatever linear phase is still on the books: the fiber applied
    // l_traversed of dispersion, the transmitter already removed half a link
    let l_trav = match cfg.link_mode {
        LinkMode::AwgnOnly => 0.0,
        _ => total,
    };
    apply_edc(&mut rx, &cfg.link, l_trav - 0.5 * total);

    // back onto the modem's sample grid (impairments may have moved rates)
    let n_grid = WINDOW_FRAMES * modem.frame_samples();
    let samples = nfdm_core::fourier::resample(&rx.samples, n_grid);
    let rx_grid = TimeSignal::new(samples, modem.sample_rate(), rx.units, rx.t0_offset);
    let received = modem.demodulate_window(&rx_grid, WINDOW_FRAMES)?;
    Ok(BurstOut {
        bits,
        sent,
        received,
    })
}

/// Equalize with the frame's pilot/training layout, then score: EVM over
/// data symbols, Q from EVM (union bound), counted BER, and GMI from LLRs
/// with the noise variance estimated from the error vectors.
fn point_metrics(frame: &FrameConfig, bursts: &[BurstOut]) -> Result<PointMetrics> {
    let n = frame.n_subcarriers;
    let mut eq = nfdm_core::txrx::Equalizer::new(n);
    for (b, out) in bursts.iter().enumerate() {
        if frame.is_training_burst(b) {
            eq.ingest_training(&out.sent, &out.received);
        }
    }

    let pilots = frame.pilot_positions();
    let mut rx_data: Vec<Complex> = Vec::new();
    let mut tx_data: Vec<Complex> = Vec::new();
    let mut tx_bits: Vec<u8> = Vec::new();
    for (b, out) in bursts.iter().enumerate() {
        if frame.is_training_burst(b) {
            continue;
        }
        let mut y = out.received.clone();
        let pilot_sent: Vec<Complex> = pilots.iter().map(|&p| out.sent[p]).collect();
        eq.equalize(&mut y, &pilots, &pilot_sent);
        for k in 0..n {
            if frame.is_pilot(k) {
                continue;
            }
            rx_data.push(y[k]);
            tx_data.push(out.sent[k]);
            tx_bits.extend_from_slice(
                &out.bits[k * qam::BITS_PER_SYMBOL..(k + 1) * qam::BITS_PER_SYMBOL],
            );
        }
    }
    if rx_data.is_empty() {
        return Err(Error::Config(
            "no data symbols: every burst in the run is a training burst".into(),
        ));
    }

    let evm = evm_db(&rx_data, &tx_data);
    let q_db = q_from_evm_qam32(10f64.powf(evm / 10.0));

    let mut rx_bits = Vec::with_capacity(tx_bits.len());
    for y in &rx_data {
        rx_bits.extend_from_slice(&qam::label_to_bits(qam::hard_decision(*y)));
    }
    let (bit_errors, n_bits) = ber_count(&tx_bits, &rx_bits);
    let ber = bit_errors as f64 / n_bits as f64;

    let sigma2 = rx_data
        .iter()
        .zip(tx_data.iter())
        .map(|(y, c)| (y - c).norm_sqr())
        .sum::<f64>()
        / rx_data.len() as f64;
    let mut llr_buf = [0.0f64; qam::BITS_PER_SYMBOL];
    let mut llrs = Vec::with_capacity(tx_bits.len());
    for y in &rx_data {
        qam::llrs(*y, sigma2.max(1e-30), &mut llr_buf);
        llrs.extend_from_slice(&llr_buf);
    }
    let gmi = gmi_from_llrs(&llrs, &tx_bits, qam::BITS_PER_SYMBOL);

    Ok(PointMetrics {
        ber,
        q_db,
        gmi,
        evm_db: evm,
        n_bits,
        bit_errors,
    })
}
