//! The nonlinear-spectrum transceiver: QAM symbols onto the continuous
//! spectrum q̂(ξ), iterative pre-distorted synthesis at the transmitter,
//! direct scattering + channel derotation at the receiver, plus the small
//! DSP blocks around them (one-tap equalizer, pilot phase tracking, launch
//! power calibration, preamble synchronization).
//!
//! Geometry: one burst occupies a slot of normalized duration T1n on a
//! synthesis lattice of step h = LATTICE_SPAN / N, which keeps the lattice
//! Nyquist band a fixed 2.67x wider than the carrier comb for every preset.
//! Bursts are processed as isolated units inside a zero-padded window of
//! `window_frames` slots so dispersion tails stay inside the processed block.

use crate::channel::LinkConfig;
use crate::error::{Error, Result};
use crate::fourier::{fft, ifft, upsample};
use crate::frame::FrameConfig;
use crate::inft::{synthesize_raw, TimeGrid};
use crate::nft::scatter;
use crate::scalar::{Scalar, C};
use crate::signal::{TimeSignal, Units};
use crate::spectrum::{build_spectrum, precompensate, CarrierLayout};
use crate::units::{watts_to_dbm, Normalization};

/// What the transmitter achieved for one burst.
#[derive(Debug, Clone, Copy)]
pub struct TxReport {
    /// relative rms deviation of the *measured* carrier values (scatter of
    /// the synthesized waveform) from the target symbols
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct NfdmModem<T: Scalar> {
    pub frame: FrameConfig<T>,
    pub layout: CarrierLayout<T>,
    /// path-averaged normalization — the scattering transforms see the
    /// lossy+EDFA link as its lossless path-averaged equivalent
    pub norm: Normalization<T>,
    /// per-carrier spectral amplitude |q̂| at the carrier centers; the launch
    /// power knob (set by `calibrate_monotone` against a power target)
    pub amplitude: T,
    /// fraction of the link rotation compensated at the transmitter (0.5
    /// splits the channel memory symmetrically)
    pub precomp_fraction: T,
    /// total link length in normalized units
    pub l_norm: T,
    /// odd number of slot frames per processing window
    pub window_frames: usize,
    pub predistort_tol: f64,
    pub predistort_iters: usize,
    /// synthesis lattice step (normalized)
    pub h: T,
    /// lattice samples per slot
    pub k_slot: usize,
    /// dense uniform ξ grid for synthesis
    pub xi_dense: Vec<T>,
    /// carrier center frequencies ξ_k = kπ/T0n
    pub xi_centers: Vec<T>,
}

impl<T: Scalar> NfdmModem<T> {
    pub fn new(frame: FrameConfig<T>, link: &LinkConfig<T>, amplitude: T) -> Result<Self> {
        frame.validate()?;
        link.validate()?;
        if !(amplitude > T::zero()) {
            return Err(Error::Config("carrier amplitude must be positive".into()));
        }
        let norm = Normalization::for_link_path_averaged(link, frame.time_scale());
        let l_norm = norm.length_to_normalized(link.total_length);
        let layout = frame.carrier_layout();
        let h = frame.lattice_h();
        let k_slot = frame.slot_samples();
        // dense ξ grid: covers the lattice band (-π/2h, π/2h); 3.2 points per
        // lattice mode rounded up to a power of two keeps the completion FFT
        // cheap without ever dropping below the peel's stability margin
        let m = ((3.2 * k_slot as f64).ceil() as usize).next_power_of_two();
        let dxi = T::PI() / (h * T::of(m as f64));
        let xi_dense: Vec<T> = (0..m)
            .map(|i| (T::of(i as f64) - T::of(m as f64 / 2.0)) * dxi)
            .collect();
        let xi_centers: Vec<T> = layout.k_range().map(|k| layout.xi_center(k)).collect();
        Ok(Self {
            frame,
            layout,
            norm,
            amplitude,
            precomp_fraction: T::of(0.5),
            l_norm,
            window_frames: 3,
            predistort_tol: 5e-4,
            predistort_iters: 16,
            h,
            k_slot,
            xi_dense,
            xi_centers,
        })
    }

    /// The synthesis lattice of one slot: K samples of pitch h centered on
    /// the slot, sample positions at cell centers.
    pub fn slot_grid(&self) -> TimeGrid<T> {
        TimeGrid {
            t_start: -self.frame.t1_norm() / T::of(2.0) + self.h / T::of(2.0),
            dt: self.h,
            n_samples: self.k_slot,
        }
    }

    /// The synthesis lattice of the whole transmit window: `window_frames`
    /// slots with the burst slot in the middle. Synthesis must run on this
    /// grid, not the slot alone — the pre-compensated waveform of a strong
    /// burst walks past the slot edges (group delay 4ξl_pre ≈ ±17 at the
    /// band edge for the 12-span link), and clipping those tails puts a
    /// floor under the predistortion residual that no amount of iteration
    /// removes.
    pub fn window_grid(&self) -> TimeGrid<T> {
        let frames = T::of(self.window_frames as f64);
        TimeGrid {
            t_start: -frames * self.frame.t1_norm() / T::of(2.0) + self.h / T::of(2.0),
            dt: self.h,
            n_samples: self.window_frames * self.k_slot,
        }
    }

    /// e^{+4iξ² l_pre} applied to carrier k by the precompensation.
    fn precomp_phase(&self, k: usize) -> C<T> {
        let xi = self.xi_centers[k];
        let l_pre = self.l_norm * self.precomp_fraction;
        C::from_polar(T::one(), T::of(4.0) * xi * xi * l_pre)
    }

    /// Scatter a burst waveform on a 4x-refined lattice and read the carriers.
    fn measure_carriers(&self, slot: &TimeSignal<T>) -> Result<Vec<C<T>>> {
        let q4 = upsample(&slot.samples, 4);
        let dt4 = slot.dt() / T::of(4.0);
        let (a, b) = scatter(&q4, slot.t0_offset, dt4, &self.xi_centers, 1);
        let mut out = Vec::with_capacity(a.len());
        for (i, (ai, bi)) in a.iter().zip(b.iter()).enumerate() {
            if ai.norm() < T::of(1e-12) {
                return Err(Error::NearSingularScattering {
                    xi: self.xi_centers[i].to_f64_lossy(),
                    a_abs: ai.norm().to_f64_lossy(),
                });
            }
            out.push(*bi / *ai);
        }
        Ok(out)
    }

    /// Synthesize one burst (normalized units, one window long).
    ///
    /// The synthesis error of completion + layer peeling is O(h²) but not
    /// zero; left alone it would dominate the error budget at high amplitude.
    /// So the carrier loads are iterated: measure the synthesized waveform
    /// with the forward scattering operator the receiver itself uses, and move
    /// the drive values against the deviation until the *measured* spectrum
    /// matches the target symbols. First iterate = plain inverse transform.
    pub fn modulate(&self, symbols: &[C<T>]) -> Result<(TimeSignal<T>, TxReport)> {
        let n = self.layout.n_carriers;
        if symbols.len() != n {
            return Err(Error::Input(format!(
                "expected {n} symbols, got {}",
                symbols.len()
            )));
        }
        let grid = self.window_grid();
        let norm_t: f64 = symbols
            .iter()
            .map(|c| c.norm_sqr().to_f64_lossy())
            .sum::<f64>()
            .sqrt()
            .max(1e-300);
        let mut drive = symbols.to_vec();
        let mut best: Option<(f64, TimeSignal<T>, usize)> = None;
        let mu = T::of(0.9);

        for it in 0..self.predistort_iters.max(1) {
            let mut spec = build_spectrum(
                &drive,
                &self.layout,
                self.amplitude,
                0,
                self.xi_dense.clone(),
            )?;
            precompensate(&mut spec, self.l_norm, self.precomp_fraction);
            let sig = synthesize_raw(&spec, &grid)?;
            let meas = self.measure_carriers(&sig)?;
            let mut err = Vec::with_capacity(n);
            let mut resid2 = 0.0f64;
            for k in 0..n {
                let demod = meas[k] * self.precomp_phase(k).conj().unscale(self.amplitude);
                let e = demod - symbols[k];
                resid2 += e.norm_sqr().to_f64_lossy();
                err.push(e);
            }
            let resid = resid2.sqrt() / norm_t;
            let improved = best.as_ref().map_or(true, |(r, _, _)| resid < *r);
            if improved {
                best = Some((resid, sig, it + 1));
            }
            if resid <= self.predistort_tol {
                break;
            }
            if let Some((r_best, _, _)) = &best {
                if resid > 4.0 * r_best.max(self.predistort_tol) && it > 2 {
                    break;
                }
            }
            for k in 0..n {
                drive[k] -= err[k].scale(mu);
            }
        }
        let (residual, signal, iterations) = best.expect("at least one iterate");
        Ok((signal, TxReport {
            residual,
            iterations,
        }))
    }

    /// Embed a one-slot waveform in the middle of a zero-padded window.
    pub fn place_in_window(&self, slot: &TimeSignal<T>) -> TimeSignal<T> {
        let frames = self.window_frames;
        assert!(frames % 2 == 1, "window must have odd frame count");
        assert_eq!(slot.len(), self.k_slot);
        let pad = (frames - 1) / 2;
        let mut samples = vec![C::new(T::zero(), T::zero()); frames * self.k_slot];
        samples[pad * self.k_slot..(pad + 1) * self.k_slot].copy_from_slice(&slot.samples);
        let slot_dur = T::of(self.k_slot as f64) * slot.dt();
        TimeSignal::new(
            samples,
            slot.sample_rate,
            slot.units,
            slot.t0_offset - T::of(pad as f64) * slot_dur,
        )
    }

    /// Full transmitter: symbols -> pre-distorted physical window waveform.
    pub fn transmit(&self, symbols: &[C<T>]) -> Result<(TimeSignal<T>, TxReport)> {
        let (q, report) = self.modulate(symbols)?;
        Ok((self.norm.denormalize(&q), report))
    }

    /// Full receiver for one window. `l_traversed_norm` is the normalized
    /// distance the waveform actually propagated (0 for back-to-back or
    /// noise-loaded operation, `self.l_norm` after the full link); the
    /// remaining half of the channel rotation plus the transmitter
    /// precompensation are undone here:
    ///   c_k = (b/a)(ξ_k) · e^{+4iξ_k²(l_traversed - f·l_total)} / amplitude.
    pub fn receive(&self, window: &TimeSignal<T>, l_traversed_norm: T) -> Result<Vec<C<T>>> {
        if window.units != Units::Physical {
            return Err(Error::Input("receive expects a physical-units window".into()));
        }
        let q = self.norm.normalize(window);
        // refine to a 4x lattice over the window before scattering; the FFT
        // interpolation keeps the first sample position and total duration
        let n_target = 4 * self.window_frames * self.k_slot;
        let q4 = crate::fourier::resample(&q.samples, n_target);
        let dt4 = q.dt() * T::of(q.len() as f64) / T::of(n_target as f64);
        let (a, b) = scatter(&q4, q.t0_offset, dt4, &self.xi_centers, 1);
        let four = T::of(4.0);
        let l_rem = l_traversed_norm - self.precomp_fraction * self.l_norm;
        let mut out = Vec::with_capacity(self.xi_centers.len());
        for (k, &xi) in self.xi_centers.iter().enumerate() {
            if a[k].norm() < T::of(1e-12) {
                return Err(Error::NearSingularScattering {
                    xi: xi.to_f64_lossy(),
                    a_abs: a[k].norm().to_f64_lossy(),
                });
            }
            let derot = C::from_polar(T::one(), four * xi * xi * l_rem);
            out.push((b[k] / a[k]) * derot.unscale(self.amplitude));
        }
        Ok(out)
    }
}

/// Launch power of a windowed burst referred to the slot duration: the mean
/// power of the equivalent contiguous burst stream, in dBm.
pub fn slot_launch_dbm<T: Scalar>(window: &TimeSignal<T>, slot_duration: T) -> T {
    watts_to_dbm(window.energy() / slot_duration)
}

/// One-tap-per-subcarrier LS equalizer with a pilot-driven common-phase
/// correction. Fit on training bursts, then applied to every data burst.
#[derive(Debug, Clone)]
pub struct Equalizer<T: Scalar> {
    num: Vec<C<T>>,
    den: Vec<T>,
}

impl<T: Scalar> Equalizer<T> {
    pub fn new(n_subcarriers: usize) -> Self {
        Self {
            num: vec![C::new(T::zero(), T::zero()); n_subcarriers],
            den: vec![T::zero(); n_subcarriers],
        }
    }

    /// Accumulate one training burst (known sent symbols, received values).
    pub fn ingest_training(&mut self, sent: &[C<T>], received: &[C<T>]) {
        assert_eq!(sent.len(), self.num.len());
        assert_eq!(received.len(), self.num.len());
        for k in 0..self.num.len() {
            self.num[k] += sent[k].conj() * received[k];
            self.den[k] += sent[k].norm_sqr();
        }
    }

    /// LS estimate of the per-subcarrier tap (identity where no training
    /// energy was seen).
    pub fn tap(&self, k: usize) -> C<T> {
        if self.den[k] > T::zero() {
            self.num[k].unscale(self.den[k])
        } else {
            C::new(T::one(), T::zero())
        }
    }

    /// Divide out the taps, then remove the common phase estimated from the
    /// pilots: θ = arg Σ_p conj(c_p) y_p. Returns θ.
    pub fn equalize(
        &self,
        received: &mut [C<T>],
        pilot_positions: &[usize],
        pilot_sent: &[C<T>],
    ) -> T {
        assert_eq!(received.len(), self.num.len());
        for (k, y) in received.iter_mut().enumerate() {
            *y /= self.tap(k);
        }
        if pilot_positions.is_empty() {
            return T::zero();
        }
        assert_eq!(pilot_positions.len(), pilot_sent.len());
        let mut acc = C::new(T::zero(), T::zero());
        for (&p, c) in pilot_positions.iter().zip(pilot_sent.iter()) {
            acc += c.conj() * received[p];
        }
        let theta = acc.arg();
        let rot = C::from_polar(T::one(), -theta);
        for y in received.iter_mut() {
            *y *= rot;
        }
        theta
    }
}

/// Find the knob value (e.g. spectral amplitude) at which a monotonically
/// increasing power measurement hits `target_dbm`, by geometric bisection on
/// the positive knob. Errors with the achievable range when the target is
/// outside the bracket.
pub fn calibrate_monotone<T: Scalar>(
    mut measure_dbm: impl FnMut(T) -> Result<T>,
    target_dbm: T,
    knob_lo: T,
    knob_hi: T,
    tol_db: T,
    max_iters: usize,
) -> Result<T> {
    if !(knob_lo > T::zero() && knob_hi > knob_lo) {
        return Err(Error::Config("calibration bracket must be 0 < lo < hi".into()));
    }
    let m_lo = measure_dbm(knob_lo)?;
    let m_hi = measure_dbm(knob_hi)?;
    if target_dbm < m_lo || target_dbm > m_hi {
        return Err(Error::PowerRange {
            target_dbm: target_dbm.to_f64_lossy(),
            lo_dbm: m_lo.to_f64_lossy(),
            hi_dbm: m_hi.to_f64_lossy(),
        });
    }
    let mut lo = knob_lo;
    let mut hi = knob_hi;
    let mut best = (T::infinity(), knob_lo);
    let mut iters = 0usize;
    for it in 0..max_iters {
        iters = it + 1;
        let mid = (lo * hi).sqrt();
        let m = measure_dbm(mid)?;
        let dev = (m - target_dbm).abs();
        if dev < best.0 {
            best = (dev, mid);
        }
        if dev <= tol_db {
            return Ok(mid);
        }
        if m < target_dbm {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.0 <= tol_db {
        Ok(best.1)
    } else {
        Err(Error::Convergence {
            achieved: best.0.to_f64_lossy(),
            tolerance: tol_db.to_f64_lossy(),
            iterations: iters,
        })
    }
}

/// Unit-amplitude linear chirp sweeping ±bandwidth/2 — a good correlation
/// block: flat spectrum, autocorrelation width ~1/bandwidth.
pub fn chirp_preamble<T: Scalar>(n: usize, sample_rate: T, bandwidth: T) -> TimeSignal<T> {
    let dt = T::one() / sample_rate;
    let dur = T::of(n as f64) * dt;
    let two_pi = T::of(2.0) * T::PI();
    let samples: Vec<C<T>> = (0..n)
        .map(|i| {
            let t = T::of(i as f64) * dt;
            // instantaneous frequency -B/2 + B t/D
            let ph = two_pi * (bandwidth * t * t / (T::of(2.0) * dur) - bandwidth * t / T::of(2.0));
            C::from_polar(T::one(), ph)
        })
        .collect();
    TimeSignal::new(samples, sample_rate, Units::Physical, T::zero())
}

/// Synchronization preamble: `n_reps` identical chirp blocks back to back.
/// The repetition gives a waveform-independent frequency estimate with an
/// unambiguous range of ±sample_rate/(2·block_len); the chirp content gives
/// a sharp timing correlation.
pub fn sync_preamble<T: Scalar>(
    block_len: usize,
    n_reps: usize,
    sample_rate: T,
    bandwidth: T,
) -> TimeSignal<T> {
    let block = chirp_preamble(block_len, sample_rate, bandwidth);
    let mut samples = Vec::with_capacity(block_len * n_reps);
    for _ in 0..n_reps {
        samples.extend_from_slice(&block.samples);
    }
    TimeSignal::new(samples, sample_rate, Units::Physical, T::zero())
}

#[derive(Debug, Clone, Copy)]
pub struct SyncResult<T: Scalar> {
    pub delay_samples: usize,
    pub frequency_offset: T,
    /// normalized correlation peak in [0, 1]
    pub peak_metric: T,
}

const SYNC_METRIC_THRESHOLD: f64 = 0.5;

/// Locate a repeated preamble (as built by `sync_preamble` with `n_reps`
/// blocks) in a received block and estimate the carrier frequency offset.
///
/// Two stages: (1) the offset comes from the phase of the sliding lag-one-
/// block autocorrelation — immune to the delay being unknown and to the
/// chirp's delay/Doppler coupling; (2) the timing comes from an FFT
/// cross-correlation against the full preamble after derotating the estimated
/// offset. Errors with `SyncFailure` when the normalized correlation peak is
/// below 0.5 (pure noise scores ~1/sqrt(preamble length)).
pub fn synchronize<T: Scalar>(
    rx: &TimeSignal<T>,
    preamble: &TimeSignal<T>,
    n_reps: usize,
) -> Result<SyncResult<T>> {
    let n = rx.len();
    let np = preamble.len();
    if np == 0 || n < np {
        return Err(Error::Input(
            "received block shorter than the preamble".into(),
        ));
    }
    if n_reps < 2 || np % n_reps != 0 {
        return Err(Error::Input(
            "preamble must contain >= 2 equal repetition blocks".into(),
        ));
    }
    let dt = T::one() / rx.sample_rate;
    let block = np / n_reps;
    let span = np - block;

    // stage 1: sliding lag-`block` autocorrelation P(d) = Σ rx[d+i+block] conj(rx[d+i])
    let x = &rx.samples;
    let mut p = C::new(T::zero(), T::zero());
    for i in 0..span {
        p += x[i + block] * x[i].conj();
    }
    let (mut p_best, mut _d_coarse) = (p, 0usize);
    for d in 0..n - np {
        // slide window [d, d+span) -> [d+1, d+1+span)
        p += x[d + span + block] * x[d + span].conj() - x[d + block] * x[d].conj();
        if p.norm() > p_best.norm() {
            p_best = p;
            _d_coarse = d + 1;
        }
    }
    let two_pi = T::of(2.0) * T::PI();
    let freq = p_best.arg() / (two_pi * T::of(block as f64) * dt);

    // stage 2: derotate and cross-correlate the full preamble
    let derot: Vec<C<T>> = x
        .iter()
        .enumerate()
        .map(|(i, v)| *v * C::from_polar(T::one(), -two_pi * freq * T::of(i as f64) * dt))
        .collect();
    let mut padded = preamble.samples.clone();
    padded.resize(n, C::new(T::zero(), T::zero()));
    let rx_f = fft(&derot);
    let pre_f = fft(&padded);
    let prod: Vec<C<T>> = rx_f
        .iter()
        .zip(pre_f.iter())
        .map(|(r, q)| *r * q.conj())
        .collect();
    let corr = ifft(&prod);
    let (mut delay, mut peak) = (0usize, T::zero());
    for (i, c) in corr.iter().enumerate().take(n - np + 1) {
        let m = c.norm();
        if m > peak {
            peak = m;
            delay = i;
        }
    }
    let e_rx: T = derot[delay..delay + np]
        .iter()
        .map(|v| v.norm_sqr())
        .fold(T::zero(), |a, b| a + b);
    let e_pre: T = preamble
        .samples
        .iter()
        .map(|v| v.norm_sqr())
        .fold(T::zero(), |a, b| a + b);
    let denom = (e_rx * e_pre).sqrt();
    // ifft(fft(rx)·conj(fft(pre))) is already the raw lagged inner product:
    // the inverse transform's 1/n cancels the n from the convolution theorem
    let metric = if denom > T::zero() { peak / denom } else { T::zero() };
    if metric.to_f64_lossy() < SYNC_METRIC_THRESHOLD {
        return Err(Error::SyncFailure {
            metric: metric.to_f64_lossy(),
            threshold: SYNC_METRIC_THRESHOLD,
        });
    }
    Ok(SyncResult {
        delay_samples: delay,
        frequency_offset: freq,
        peak_metric: metric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::dbm_to_watts;
    use num_complex::Complex64;
    use rand::prelude::*;

    fn desk_modem(amplitude: f64) -> NfdmModem<f64> {
        let frame = FrameConfig::new(64, 2e-9, 4e-9);
        let link = LinkConfig::<f64>::standard();
        NfdmModem::new(frame, &link, amplitude).unwrap()
    }

    fn random_symbols(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let con = crate::qam::constellation::<f64>();
        (0..n).map(|_| con[rng.gen_range(0..32)]).collect()
    }

    #[test]
    fn modem_geometry() {
        let m = desk_modem(0.5);
        assert_eq!(m.k_slot, 512);
        assert!((m.h - 0.1875).abs() < 1e-15);
        assert_eq!(m.xi_dense.len(), 2048);
        assert_eq!(m.xi_centers.len(), 64);
        // centers sit well inside the dense band
        let xi_max = m.xi_dense.last().unwrap().abs().max(m.xi_dense[0].abs());
        let c_max = m.xi_centers.last().unwrap().abs().max(m.xi_centers[0].abs());
        assert!(c_max < 0.5 * xi_max, "centers {c_max} vs band {xi_max}");
        // normalized link length: 975.6 km over z_scale
        assert!((m.l_norm * m.norm.z_scale - 975.6e3).abs() < 1.0);
    }

    #[test]
    fn back_to_back_recovers_symbols() {
        // transmit -> receive with zero traversed distance: precompensation
        // and derotation cancel, symbols come back at the predistortion
        // residual level
        let m = desk_modem(0.6);
        let syms = random_symbols(64, 11);
        let (win, rep) = m.transmit(&syms).unwrap();
        assert!(rep.residual < m.predistort_tol, "tx residual {}", rep.residual);
        let out = m.receive(&win, 0.0).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for (o, s) in out.iter().zip(syms.iter()) {
            num += (o - s).norm_sqr();
            den += s.norm_sqr();
        }
        let evm = (num / den).sqrt();
        assert!(evm < 2e-3, "b2b evm {evm:.3e}");
    }

    #[test]
    fn burst_energy_is_confined_to_its_slot() {
        // synthesis runs on the whole window, so the neighbor slots carry
        // real (tiny) tails; at the nominal -2 dBm operating amplitude the
        // spill must stay inside the 0.1% design allowance
        let m = desk_modem(2.6);
        let syms = random_symbols(64, 12);
        let (win, _) = m.transmit(&syms).unwrap();
        let k = m.k_slot;
        assert_eq!(win.len(), 3 * k);
        let lead: f64 = win.samples[..k].iter().map(|v| v.norm_sqr()).sum();
        let tail: f64 = win.samples[2 * k..].iter().map(|v| v.norm_sqr()).sum();
        let total: f64 = win.samples.iter().map(|v| v.norm_sqr()).sum();
        let spill = (lead + tail) / total;
        assert!(spill < 1e-3, "slot spill {spill:.2e}");
        // window power bookkeeping: the launch power referred to one slot
        // duration matches the mid-slot mean power up to that spill
        let p_dbm = slot_launch_dbm(&win, m.frame.t1());
        let mid: f64 = win.samples[k..2 * k].iter().map(|v| v.norm_sqr()).sum::<f64>() / k as f64;
        assert!((dbm_to_watts(p_dbm) - mid).abs() < 5e-3 * mid);
    }

    #[test]
    fn predistortion_beats_raw_synthesis() {
        // at data-bearing amplitude the iterated transmitter must land an
        // order of magnitude below the one-shot inverse transform
        let mut m = desk_modem(1.3);
        let syms = random_symbols(64, 13);
        m.predistort_iters = 1;
        let (_, raw) = m.modulate(&syms).unwrap();
        m.predistort_iters = 16;
        let (_, refined) = m.modulate(&syms).unwrap();
        assert!(
            refined.residual < raw.residual / 10.0,
            "raw {:.3e} refined {:.3e}",
            raw.residual,
            refined.residual
        );
    }

    #[test]
    fn equalizer_inverts_taps_and_common_phase() {
        let n = 64;
        let syms = random_symbols(n, 21);
        let taps: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(0.9 + 0.002 * k as f64, 0.3 * (k as f64 * 0.7).sin()))
            .collect();
        let mut eq = Equalizer::new(n);
        for burst in 0..4 {
            let train = random_symbols(n, 100 + burst);
            let recv: Vec<Complex64> = train.iter().zip(taps.iter()).map(|(c, h)| c * h).collect();
            eq.ingest_training(&train, &recv);
        }
        // data burst with an extra common rotation on top of the taps
        let extra = Complex64::from_polar(1.0, 0.2);
        let mut recv: Vec<Complex64> = syms
            .iter()
            .zip(taps.iter())
            .map(|(c, h)| c * h * extra)
            .collect();
        let pilots = vec![0usize, 16, 32, 48];
        let pilot_sent: Vec<Complex64> = pilots.iter().map(|&p| syms[p]).collect();
        let theta = eq.equalize(&mut recv, &pilots, &pilot_sent);
        assert!((theta - 0.2).abs() < 1e-9, "theta {theta}");
        for (y, c) in recv.iter().zip(syms.iter()) {
            assert!((y - c).norm() < 1e-9);
        }
    }

    #[test]
    fn calibration_bisects_to_target() {
        // monotone analytic power law: P = A² · 100 µW
        let f = |a: f64| Ok(watts_to_dbm(a * a * 1e-4));
        let a = calibrate_monotone(f, -2.0, 0.1, 10.0, 0.05, 30).unwrap();
        let expect = (dbm_to_watts(-2.0f64) / 1e-4).sqrt();
        assert!(
            (watts_to_dbm(a * a * 1e-4) + 2.0).abs() <= 0.05,
            "a {a} vs {expect}"
        );
    }

    #[test]
    fn calibration_rejects_unreachable_target() {
        let f = |a: f64| Ok(watts_to_dbm(a * a * 1e-4));
        match calibrate_monotone(f, 30.0, 0.1, 10.0, 0.05, 30) {
            Err(Error::PowerRange {
                target_dbm,
                lo_dbm,
                hi_dbm,
            }) => {
                assert_eq!(target_dbm, 30.0);
                assert!(lo_dbm < hi_dbm);
                assert!(hi_dbm < 30.0);
            }
            other => panic!("expected power-range error, got {other:?}"),
        }
    }

    fn offset_rx(pre: &TimeSignal<f64>, delay: usize, df: f64, n: usize) -> TimeSignal<f64> {
        let fs = pre.sample_rate;
        let mut samples = vec![Complex64::new(0.0, 0.0); n];
        for (i, p) in pre.samples.iter().enumerate() {
            let t = (delay + i) as f64 / fs;
            samples[delay + i] = p * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * df * t);
        }
        TimeSignal::new(samples, fs, Units::Physical, 0.0)
    }

    #[test]
    fn synchronizer_finds_known_delay() {
        let fs = 85.333e9;
        let pre = sync_preamble::<f64>(256, 16, fs, 20e9);
        let rx = offset_rx(&pre, 1234, 0.0, 16384);
        let res = synchronize(&rx, &pre, 16).unwrap();
        assert_eq!(res.delay_samples, 1234);
        assert!(res.frequency_offset.abs() < 1e5);
        assert!(res.peak_metric > 0.95, "peak metric {}", res.peak_metric);
    }

    #[test]
    fn synchronizer_estimates_large_frequency_offset() {
        // 100 MHz is far beyond what a full-preamble phase estimate could
        // disambiguate; the 3 ns repetition block keeps it in range (±166 MHz)
        let fs = 85.333e9;
        let pre = sync_preamble::<f64>(256, 16, fs, 20e9);
        let df = 100e6;
        let rx = offset_rx(&pre, 777, df, 16384);
        let res = synchronize(&rx, &pre, 16).unwrap();
        assert_eq!(res.delay_samples, 777);
        assert!(
            (res.frequency_offset - df).abs() < 1e6,
            "freq estimate {} vs {df}",
            res.frequency_offset
        );
    }

    #[test]
    fn synchronizer_rejects_pure_noise() {
        let fs = 85.333e9;
        let pre = sync_preamble::<f64>(256, 16, fs, 20e9);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let samples: Vec<Complex64> = (0..16384)
            .map(|_| {
                Complex64::new(
                    rng.sample(rand_distr::StandardNormal),
                    rng.sample(rand_distr::StandardNormal),
                )
            })
            .collect();
        let rx = TimeSignal::new(samples, fs, Units::Physical, 0.0);
        match synchronize(&rx, &pre, 16) {
            Err(Error::SyncFailure { metric, .. }) => {
                assert!(metric < 0.2, "noise metric suspiciously high: {metric}");
            }
            other => panic!("expected sync failure, got {other:?}"),
        }
    }
}
