//! Thin wrapper around rustfft plus the spectral helpers the rest of the
//! crate leans on: angular frequency grids in FFT bin order and band-limited
//! rational resampling (used for DAC/ADC rate conversion and for refining the
//! scattering lattice).
//!
//! Conventions: `forward` is the e^{-i2πkn/N} kernel, unnormalized;
//! `inverse` carries the 1/N so that inverse(forward(x)) == x.

use crate::scalar::{Scalar, C};
use rustfft::FftPlanner;
use std::sync::Arc;

/// Planned FFT pair for a fixed size. Plan once, run many times — the
/// split-step loop calls this thousands of times per span.
pub struct Fft<T: Scalar> {
    fwd: Arc<dyn rustfft::Fft<T>>,
    inv: Arc<dyn rustfft::Fft<T>>,
    n: usize,
}

impl<T: Scalar> Fft<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            n,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, x: &mut [C<T>]) {
        debug_assert_eq!(x.len(), self.n);
        self.fwd.process(x);
    }

    /// Inverse transform, normalized by 1/N.
    pub fn inverse(&self, x: &mut [C<T>]) {
        debug_assert_eq!(x.len(), self.n);
        self.inv.process(x);
        let s = T::one() / T::of(self.n as f64);
        for v in x.iter_mut() {
            *v = v.scale(s);
        }
    }
}

/// One-shot forward FFT (allocates a plan; fine outside hot loops).
pub fn fft<T: Scalar>(x: &[C<T>]) -> Vec<C<T>> {
    let mut y = x.to_vec();
    Fft::new(x.len()).forward(&mut y);
    y
}

/// One-shot normalized inverse FFT.
pub fn ifft<T: Scalar>(x: &[C<T>]) -> Vec<C<T>> {
    let mut y = x.to_vec();
    Fft::new(x.len()).inverse(&mut y);
    y
}

/// FFT-ordered natural frequencies: [0, 1, .., n/2-1, -n/2, .., -1] / (n·dt).
pub fn fft_freq<T: Scalar>(n: usize, dt: T) -> Vec<T> {
    let nn = n as i64;
    (0..nn)
        .map(|k| {
            let k_signed = if k < (nn + 1) / 2 { k } else { k - nn };
            T::of(k_signed as f64) / (T::of(nn as f64) * dt)
        })
        .collect()
}

/// FFT-ordered angular frequencies ω = 2πf.
pub fn omega_grid<T: Scalar>(n: usize, dt: T) -> Vec<T> {
    fft_freq(n, dt)
        .into_iter()
        .map(|f| T::of(2.0) * T::PI() * f)
        .collect()
}

/// Band-limited resampling to an arbitrary length via spectral zero-padding /
/// truncation. Amplitude-preserving (a pure tone keeps its amplitude). The
/// even-length Nyquist bin is split (up) or folded (down) so real signals stay
/// real and the interpolation is exact for content below both Nyquists.
pub fn resample<T: Scalar>(x: &[C<T>], n_out: usize) -> Vec<C<T>> {
    let n = x.len();
    if n == n_out {
        return x.to_vec();
    }
    assert!(n > 0 && n_out > 0, "resample of empty signal");
    let mut spec = fft(x);
    let mut out = vec![C::<T>::new(T::zero(), T::zero()); n_out];
    let half = T::of(0.5);

    let keep = n.min(n_out);
    // positive frequencies [0, keep/2), negative frequencies (-keep/2, 0)
    let pos = keep / 2;
    let neg = (keep - 1) / 2; // strictly-negative bins kept
    if keep % 2 == 0 {
        // shared Nyquist bin of the smaller grid
        if n_out > n {
            let v = spec[n - pos].scale(half); // old bin ±n/2 lives at index n - n/2
            out[pos] = v;
            out[n_out - pos] = v;
        } else {
            // two old bins ±n_out/2 alias onto the new Nyquist bin
            out[pos] = spec[pos] + spec[n - pos];
        }
        spec[n - pos] = C::new(T::zero(), T::zero()); // consumed
    }
    out[..pos].copy_from_slice(&spec[..pos]);
    for j in 1..=neg {
        out[n_out - j] = spec[n - j];
    }

    let mut y = ifft(&out);
    let gain = T::of(n_out as f64) / T::of(n as f64);
    for v in y.iter_mut() {
        *v = v.scale(gain);
    }
    y
}

/// Integer-factor band-limited upsampling.
pub fn upsample<T: Scalar>(x: &[C<T>], factor: usize) -> Vec<C<T>> {
    resample(x, x.len() * factor)
}
