//! Transceiver hardware impairments: DAC/ADC rate conversion, mid-rise
//! quantization at fractional ENOB, 5th-order Bessel analog front end,
//! laser phase noise (Wiener), and carrier frequency offset.
//!
//! Order on the transmit side mirrors the physical chain:
//! resample -> quantize -> analog filter -> phase noise -> frequency offset.
//! The receive side models the ADC and the local oscillator:
//! resample -> LO phase noise.

use crate::error::Result;
use crate::fourier::{fft_freq, resample, Fft};
use crate::scalar::{Scalar, C};
use crate::signal::TimeSignal;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy)]
pub struct ImpairmentConfig<T: Scalar> {
    /// master switch; false = ideal transceiver, all of the below ignored
    pub enabled: bool,
    pub dac_rate: T,
    pub adc_rate: T,
    /// -3 dB bandwidth of the 5th-order Bessel front end
    pub dac_bandwidth: T,
    pub enob: T,
    /// per-laser linewidth (Tx and LO each run an independent Wiener process)
    pub laser_linewidth: T,
    pub frequency_offset: T,
    pub resample_on: bool,
    pub quantizer_on: bool,
    pub filter_on: bool,
    pub phase_noise_on: bool,
    pub frequency_offset_on: bool,
}

impl<T: Scalar> Default for ImpairmentConfig<T> {
    fn default() -> Self {
        Self {
            enabled: false,
            dac_rate: T::of(88e9),
            adc_rate: T::of(80e9),
            dac_bandwidth: T::of(16e9),
            enob: T::of(5.5),
            laser_linewidth: T::of(1e3),
            frequency_offset: T::zero(),
            resample_on: true,
            quantizer_on: true,
            filter_on: true,
            phase_noise_on: true,
            frequency_offset_on: true,
        }
    }
}

/// Mid-rise uniform quantizer with 2^enob levels across [-range, +range]
/// per quadrature (enob may be fractional). Values beyond the range clip to
/// the outermost levels.
pub fn quantize_midrise<T: Scalar>(x: &mut [C<T>], enob: T, range_re: T, range_im: T) {
    let levels = T::of(2.0).powf(enob);
    let q = |v: T, range: T| -> T {
        if range <= T::zero() {
            return v;
        }
        let delta = T::of(2.0) * range / levels;
        let y = ((v / delta).floor() + T::of(0.5)) * delta;
        let lim = range - delta / T::of(2.0);
        y.max(-lim).min(lim)
    };
    for s in x.iter_mut() {
        *s = C::new(q(s.re, range_re), q(s.im, range_im));
    }
}

/// RMS of each quadrature — the quantizer range convention is ±4σ.
fn quadrature_rms<T: Scalar>(x: &[C<T>]) -> (T, T) {
    if x.is_empty() {
        return (T::zero(), T::zero());
    }
    let n = T::of(x.len() as f64);
    let (mut sr, mut si) = (T::zero(), T::zero());
    for s in x {
        sr += s.re * s.re;
        si += s.im * s.im;
    }
    ((sr / n).sqrt(), (si / n).sqrt())
}

/// 5th-order Bessel low-pass response at frequency f, -3 dB at `f3db`.
/// H(s) = 945 / (s^5 + 15s^4 + 105s^3 + 420s^2 + 945s + 945) with
/// s = j·2.42741070215263·f/f3db (the normalized Bessel polynomial has its
/// -3 dB point at 2.4274 rad/s for n = 5).
pub fn bessel5_response<T: Scalar>(f: T, f3db: T) -> C<T> {
    let s = C::new(T::zero(), T::of(2.42741070215263) * f / f3db);
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s2 * s2;
    let s5 = s4 * s;
    let denom = s5
        + s4.scale(T::of(15.0))
        + s3.scale(T::of(105.0))
        + s2.scale(T::of(420.0))
        + s.scale(T::of(945.0))
        + C::new(T::of(945.0), T::zero());
    C::new(T::of(945.0), T::zero()) / denom
}

fn apply_filter<T: Scalar>(sig: &mut TimeSignal<T>, f3db: T) {
    let n = sig.len();
    let freqs = fft_freq(n, sig.dt());
    let fft = Fft::new(n);
    fft.forward(&mut sig.samples);
    for (v, f) in sig.samples.iter_mut().zip(freqs.iter()) {
        *v *= bessel5_response(*f, f3db);
    }
    fft.inverse(&mut sig.samples);
}

fn apply_wiener_phase<T: Scalar>(sig: &mut TimeSignal<T>, linewidth: T, rng: &mut ChaCha8Rng) {
    // increment variance 2π Δν dt per sample
    let var = T::of(2.0) * T::PI() * linewidth * sig.dt();
    let std = var.sqrt();
    let mut phi = T::zero();
    for s in sig.samples.iter_mut() {
        let g: f64 = rng.sample(StandardNormal);
        phi += std * T::of(g);
        *s *= C::from_polar(T::one(), phi);
    }
}

fn apply_frequency_offset<T: Scalar>(sig: &mut TimeSignal<T>, df: T) {
    let dt = sig.dt();
    let two_pi = T::of(2.0) * T::PI();
    for (i, s) in sig.samples.iter_mut().enumerate() {
        let ph = two_pi * df * T::of(i as f64) * dt;
        *s *= C::from_polar(T::one(), ph);
    }
}

fn resampled<T: Scalar>(sig: &TimeSignal<T>, new_rate: T) -> TimeSignal<T> {
    let n_out = (T::of(sig.len() as f64) * new_rate / sig.sample_rate)
        .round()
        .to_f64_lossy() as usize;
    let samples = resample(&sig.samples, n_out);
    TimeSignal::new(samples, new_rate, sig.units, sig.t0_offset)
}

/// Transmit-side chain. Returns the DAC-rate waveform ready for the fiber.
pub fn apply_tx<T: Scalar>(
    sig: &TimeSignal<T>,
    imp: &ImpairmentConfig<T>,
    rng: &mut ChaCha8Rng,
) -> Result<TimeSignal<T>> {
    if !imp.enabled {
        return Ok(sig.clone());
    }
    let mut s = if imp.resample_on {
        resampled(sig, imp.dac_rate)
    } else {
        sig.clone()
    };
    if imp.quantizer_on {
        let (sr, si) = quadrature_rms(&s.samples);
        quantize_midrise(
            &mut s.samples,
            imp.enob,
            T::of(4.0) * sr,
            T::of(4.0) * si,
        );
    }
    if imp.filter_on {
        apply_filter(&mut s, imp.dac_bandwidth);
    }
    if imp.phase_noise_on {
        apply_wiener_phase(&mut s, imp.laser_linewidth, rng);
    }
    if imp.frequency_offset_on && imp.frequency_offset != T::zero() {
        apply_frequency_offset(&mut s, imp.frequency_offset);
    }
    Ok(s)
}

/// Receive-side chain: ADC resampling and LO phase noise.
pub fn apply_rx<T: Scalar>(
    sig: &TimeSignal<T>,
    imp: &ImpairmentConfig<T>,
    rng: &mut ChaCha8Rng,
) -> Result<TimeSignal<T>> {
    if !imp.enabled {
        return Ok(sig.clone());
    }
    let mut s = if imp.resample_on {
        resampled(sig, imp.adc_rate)
    } else {
        sig.clone()
    };
    if imp.phase_noise_on {
        apply_wiener_phase(&mut s, imp.laser_linewidth, rng);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Units;
    use num_complex::Complex64;

    #[test]
    fn quantizer_sqnr_on_full_scale_sinusoid() {
        // classic check: mid-rise at B effective bits on a full-scale sine
        // gives SQNR ≈ 6.02 B + 1.76 dB. Complex tone, range = peak.
        let n = 1 << 14;
        let x: Vec<Complex64> = (0..n)
            .map(|i| {
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 371.0 * i as f64 / n as f64)
            })
            .collect();
        let mut y = x.clone();
        quantize_midrise(&mut y, 5.5, 1.0, 1.0);
        let sig: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let err: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
        let sqnr = 10.0 * (sig / err).log10();
        let want = 6.02 * 5.5 + 1.76;
        assert!(
            (sqnr - want).abs() < 1.5,
            "SQNR {sqnr:.1} dB, expected ~{want:.1}"
        );
    }

    #[test]
    fn quantizer_clips_outliers() {
        let mut y = vec![Complex64::new(10.0, -10.0)];
        quantize_midrise(&mut y, 4.0, 1.0, 1.0);
        let delta = 2.0 / 16.0;
        assert!((y[0].re - (1.0 - delta / 2.0)).abs() < 1e-12);
        assert!((y[0].im + (1.0 - delta / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn bessel_response_reference_points() {
        let h0 = bessel5_response(0.0f64, 16e9);
        assert!((h0.norm() - 1.0).abs() < 1e-12);
        let h3 = bessel5_response(16e9f64, 16e9);
        let db = 20.0 * h3.norm().log10();
        assert!((db + 3.0).abs() < 0.05, "-3 dB point off: {db:.3} dB");
        // far out of band: strong rolloff (100 dB/decade asymptotic)
        let hfar = bessel5_response(160e9f64, 16e9);
        assert!(20.0 * hfar.norm().log10() < -70.0);
    }

    #[test]
    fn phase_noise_variance_grows_linearly() {
        let n = 20_000;
        let sig = TimeSignal::new(
            vec![Complex64::new(1.0, 0.0); n],
            80e9,
            Units::Physical,
            0.0,
        );
        let mut acc = 0.0f64;
        let trials = 20;
        for seed in 0..trials {
            let mut s = sig.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            apply_wiener_phase(&mut s, 1e5, &mut rng);
            let phi_end = s.samples[n - 1].arg();
            acc += phi_end * phi_end;
        }
        // E[φ²(T)] = 2π Δν T; with unwrapped-free small variance this holds
        let want = 2.0 * std::f64::consts::PI * 1e5 * (n as f64 / 80e9);
        let got = acc / trials as f64;
        assert!(
            got > 0.3 * want && got < 3.0 * want,
            "phase variance {got:.2e} vs expected {want:.2e}"
        );
    }

    #[test]
    fn frequency_offset_shifts_a_tone() {
        let n = 4096;
        let fs = 80e9;
        let sig = TimeSignal::new(
            vec![Complex64::new(1.0, 0.0); n],
            fs,
            Units::Physical,
            0.0,
        );
        let mut s = sig.clone();
        apply_frequency_offset(&mut s, fs / n as f64 * 7.0); // exactly bin 7
        let spec = crate::fourier::fft(&s.samples);
        let peak = spec
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap()
            .0;
        assert_eq!(peak, 7);
    }

    #[test]
    fn disabled_chain_is_identity() {
        let sig = TimeSignal::new(
            vec![Complex64::new(0.5, -0.25); 64],
            85e9,
            Units::Physical,
            0.0,
        );
        let imp = ImpairmentConfig::<f64>::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = apply_tx(&sig, &imp, &mut rng).unwrap();
        for (a, b) in sig.samples.iter().zip(out.samples.iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn tx_chain_resamples_to_dac_rate() {
        let f = crate::frame::FrameConfig::<f64>::new(64, 2e-9, 4e-9);
        let n = 3 * f.slot_samples(); // 1536 at the lattice rate 256/3 GHz
        let sig = TimeSignal::new(
            vec![Complex64::new(1e-3, 0.0); n],
            f.lattice_rate(),
            Units::Physical,
            0.0,
        );
        let imp = ImpairmentConfig {
            enabled: true,
            ..ImpairmentConfig::<f64>::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = apply_tx(&sig, &imp, &mut rng).unwrap();
        // 256/3 GHz x 33/32 = 88 GHz exactly: 1536 -> 1584 samples
        assert_eq!(out.len(), 1584);
        assert!((out.sample_rate - 88e9).abs() < 1e-3);
    }
}
