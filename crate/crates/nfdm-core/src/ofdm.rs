//! CP-OFDM twin of the nonlinear-spectrum modem: same frame geometry, same
//! constellation, same launch-power semantics, linear dispersion compensation
//! split between transmitter and receiver. Serves as the like-for-like
//! baseline the nonlinear multiplexer is judged against.

use crate::channel::LinkConfig;
use crate::error::{Error, Result};
use crate::fourier::{omega_grid, Fft};
use crate::frame::FrameConfig;
use crate::scalar::{Scalar, C};
use crate::signal::{TimeSignal, Units};

#[derive(Debug, Clone)]
pub struct OfdmModem<T: Scalar> {
    pub frame: FrameConfig<T>,
    /// DFT size: 4 bins per subcarrier gives the same relative oversampling
    /// at every preset
    pub n_fft: usize,
    pub n_cp: usize,
}

impl<T: Scalar> OfdmModem<T> {
    pub fn new(frame: FrameConfig<T>) -> Result<Self> {
        frame.validate()?;
        let n_fft = 4 * frame.n_subcarriers;
        // CP spans the guard interval: n_cp/n_fft = GI/T0, which is an
        // integer ratio (1 or 2) for every preset
        let ratio = (frame.guard_interval / frame.t0).to_f64_lossy();
        let n_cp = (ratio * n_fft as f64).round() as usize;
        let back = n_cp as f64 / n_fft as f64;
        if (back - ratio).abs() > 1e-9 {
            return Err(Error::Input(format!(
                "guard/useful ratio {ratio} not representable with {n_fft}-point DFT"
            )));
        }
        Ok(Self { frame, n_fft, n_cp })
    }

    pub fn dt(&self) -> T {
        self.frame.t0 / T::of(self.n_fft as f64)
    }

    pub fn sample_rate(&self) -> T {
        T::one() / self.dt()
    }

    pub fn frame_samples(&self) -> usize {
        self.n_fft + self.n_cp
    }

    /// One burst: subcarriers onto DFT bins (k-th carrier at k/T0),
    /// IFFT, cyclic prefix. Unit mean symbol energy in, waveform out;
    /// absolute power is set by `scale_to_launch_power`.
    pub fn modulate_burst(&self, symbols: &[C<T>]) -> Result<TimeSignal<T>> {
        let n = self.frame.n_subcarriers;
        if symbols.len() != n {
            return Err(Error::Input(format!(
                "expected {n} symbols, got {}",
                symbols.len()
            )));
        }
        let mut bins = vec![C::new(T::zero(), T::zero()); self.n_fft];
        // negative-frequency half first in the symbol vector
        bins[..n / 2].copy_from_slice(&symbols[n / 2..]);
        bins[self.n_fft - n / 2..].copy_from_slice(&symbols[..n / 2]);
        let fft = Fft::new(self.n_fft);
        let mut body = bins;
        fft.inverse(&mut body);
        let root_n = T::of(self.n_fft as f64).sqrt();
        for v in body.iter_mut() {
            *v = v.scale(root_n);
        }
        let mut samples = Vec::with_capacity(self.frame_samples());
        let shift = self.n_fft - self.n_cp % self.n_fft;
        for i in 0..self.n_cp {
            samples.push(body[(i + shift) % self.n_fft]);
        }
        samples.extend_from_slice(&body);
        Ok(TimeSignal::new(
            samples,
            self.sample_rate(),
            Units::Physical,
            -self.frame.t1() / T::of(2.0),
        ))
    }

    /// Embed one burst in a zero-padded window of `frames` frame slots
    /// (odd count; burst in the middle).
    pub fn place_in_window(&self, burst: &TimeSignal<T>, frames: usize) -> TimeSignal<T> {
        assert!(frames % 2 == 1, "window must have odd frame count");
        let nf = self.frame_samples();
        assert_eq!(burst.len(), nf);
        let pad = (frames - 1) / 2;
        let mut samples = vec![C::new(T::zero(), T::zero()); frames * nf];
        samples[pad * nf..(pad + 1) * nf].copy_from_slice(&burst.samples);
        TimeSignal::new(
            samples,
            burst.sample_rate,
            burst.units,
            burst.t0_offset - T::of(pad as f64) * self.frame.t1(),
        )
    }

    /// Strip the middle frame's CP and return the subcarrier values.
    pub fn demodulate_window(&self, window: &TimeSignal<T>, frames: usize) -> Result<Vec<C<T>>> {
        let nf = self.frame_samples();
        if window.len() != frames * nf {
            return Err(Error::Input(format!(
                "window length {} != {frames} frames of {nf}",
                window.len()
            )));
        }
        let pad = (frames - 1) / 2;
        let start = pad * nf + self.n_cp;
        let mut seg = window.samples[start..start + self.n_fft].to_vec();
        let fft = Fft::new(self.n_fft);
        fft.forward(&mut seg);
        let root_n = T::one() / T::of(self.n_fft as f64).sqrt();
        let n = self.frame.n_subcarriers;
        let mut out = Vec::with_capacity(n);
        for i in 0..n / 2 {
            out.push(seg[self.n_fft - n / 2 + i].scale(root_n));
        }
        for bin in seg.iter().take(n / 2) {
            out.push(bin.scale(root_n));
        }
        Ok(out)
    }
}

/// Scale a windowed burst so that (window energy)/(slot duration) equals the
/// target launch power — the mean power of the equivalent contiguous stream.
pub fn scale_to_launch_power<T: Scalar>(
    sig: &mut TimeSignal<T>,
    slot_duration: T,
    power_watts: T,
) {
    let e = sig.energy();
    if e <= T::zero() {
        return;
    }
    let k = (power_watts * slot_duration / e).sqrt();
    for v in sig.samples.iter_mut() {
        *v = v.scale(k);
    }
}

/// Electronic dispersion compensation over `length` meters of the link's
/// fiber: multiplies the spectrum by exp(-i (β2/2) ω² length), the exact
/// inverse of linear propagation. Applied half at the transmitter and half
/// at the receiver in the usual split arrangement.
pub fn apply_edc<T: Scalar>(sig: &mut TimeSignal<T>, link: &LinkConfig<T>, length: T) {
    let n = sig.len();
    let fft = Fft::new(n);
    let w = omega_grid(n, sig.dt());
    fft.forward(&mut sig.samples);
    let half = T::of(0.5);
    for (v, &wi) in sig.samples.iter_mut().zip(w.iter()) {
        let ph = -half * link.beta2 * wi * wi * length;
        *v *= C::from_polar(T::one(), ph);
    }
    fft.inverse(&mut sig.samples);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ssfm_propagate, StepControl};
    use num_complex::Complex64;

    fn modem() -> OfdmModem<f64> {
        OfdmModem::new(FrameConfig::new(64, 2e-9, 4e-9)).unwrap()
    }

    fn random_symbols(n: usize, seed: u64) -> Vec<Complex64> {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let con = crate::qam::constellation::<f64>();
        (0..n).map(|_| con[rng.gen_range(0..32)]).collect()
    }

    #[test]
    fn geometry_of_desk_preset() {
        let m = modem();
        assert_eq!(m.n_fft, 256);
        assert_eq!(m.n_cp, 512); // GI = 2 T0
        assert_eq!(m.frame_samples(), 768);
        assert!((m.sample_rate() - 128e9).abs() < 1.0);
    }

    #[test]
    fn back_to_back_round_trip() {
        let m = modem();
        let syms = random_symbols(64, 5);
        let burst = m.modulate_burst(&syms).unwrap();
        let win = m.place_in_window(&burst, 3);
        let out = m.demodulate_window(&win, 3).unwrap();
        for (a, b) in out.iter().zip(syms.iter()) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn launch_power_scaling() {
        let m = modem();
        let syms = random_symbols(64, 6);
        let burst = m.modulate_burst(&syms).unwrap();
        let mut win = m.place_in_window(&burst, 3);
        scale_to_launch_power(&mut win, m.frame.t1(), 1e-3);
        assert!((win.energy() / m.frame.t1() - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn split_edc_inverts_linear_channel() {
        // pre-EDC(L/2) -> linear fiber L -> post-EDC(L/2) == identity
        let m = modem();
        let link = crate::channel::LinkConfig::<f64>::standard();
        let syms = random_symbols(64, 7);
        let burst = m.modulate_burst(&syms).unwrap();
        let mut win = m.place_in_window(&burst, 3);
        scale_to_launch_power(&mut win, m.frame.t1(), 1e-4);
        let reference = win.clone();
        apply_edc(&mut win, &link, link.total_length / 2.0);
        let fiber = crate::channel::FiberSection {
            beta2: link.beta2,
            gamma: 0.0,
            alpha_per_m: 0.0,
            length: link.total_length,
        };
        let (mut out, _) = ssfm_propagate(&win, &fiber, &StepControl::default());
        apply_edc(&mut out, &link, link.total_length / 2.0);
        let err: f64 = out
            .samples
            .iter()
            .zip(reference.samples.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let norm: f64 = reference
            .samples
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err / norm < 1e-9, "EDC mismatch {:.2e}", err / norm);
    }
}
