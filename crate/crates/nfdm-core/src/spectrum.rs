//! Nonlinear-Fourier-domain data container and the multiplexer that places
//! QAM symbols onto it.
//!
//! The continuous spectrum q̂(ξ) = b(ξ)/a(ξ) of the normalized focusing NLSE
//! evolves trivially with distance: q̂(ξ, l) = q̂(ξ, 0) e^{-4iξ²l}. Data is
//! written onto q̂ as a sinc-orthogonal subcarrier expansion; dispersion
//! precompensation multiplies by the inverse of (a fraction of) the channel
//! rotation before synthesis.

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C};

#[derive(Debug, Clone)]
pub struct NonlinearSpectrum<T: Scalar> {
    /// strictly increasing ξ grid
    pub xi: Vec<T>,
    /// continuous spectrum q̂ = b/a sampled on `xi`
    pub qc: Vec<C<T>>,
    /// scattering pair (a, b) when it is known, same grid
    pub ab: Option<(Vec<C<T>>, Vec<C<T>>)>,
}

impl<T: Scalar> NonlinearSpectrum<T> {
    pub fn new(xi: Vec<T>, qc: Vec<C<T>>) -> Result<Self> {
        let s = Self { xi, qc, ab: None };
        s.validate()?;
        Ok(s)
    }

    pub fn with_ab(xi: Vec<T>, a: Vec<C<T>>, b: Vec<C<T>>) -> Result<Self> {
        if a.len() != xi.len() || b.len() != xi.len() {
            return Err(Error::Input("a/b length mismatch with xi grid".into()));
        }
        let qc = a
            .iter()
            .zip(b.iter())
            .map(|(ai, bi)| *bi / *ai)
            .collect();
        let s = Self {
            xi,
            qc,
            ab: Some((a, b)),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.qc.len() != self.xi.len() {
            return Err(Error::Input("qc length mismatch with xi grid".into()));
        }
        for w in self.xi.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Input("xi grid must be strictly increasing".into()));
            }
        }
        if let Some((a, b)) = &self.ab {
            if a.len() != self.xi.len() || b.len() != self.xi.len() {
                return Err(Error::Input("a/b length mismatch with xi grid".into()));
            }
            // b/a must reproduce qc
            for ((ai, bi), qi) in a.iter().zip(b.iter()).zip(self.qc.iter()) {
                let q = *bi / *ai;
                let denom = qi.norm().max(T::of(1e-30));
                if (q - *qi).norm() / denom > T::of(1e-9) && (q - *qi).norm() > T::of(1e-12) {
                    return Err(Error::Input("ab inconsistent with qc (b/a != qc)".into()));
                }
            }
        }
        Ok(())
    }

    /// Apply the channel's own rotation over normalized distance l:
    /// q̂ <- q̂ e^{-4iξ²l}. Negative l undoes it.
    pub fn rotate(&mut self, l_norm: T) {
        let four = T::of(4.0);
        for (q, &xi) in self.qc.iter_mut().zip(self.xi.iter()) {
            let ph = -four * xi * xi * l_norm;
            *q *= C::from_polar(T::one(), ph);
        }
        if let Some((_, b)) = &mut self.ab {
            for (bi, &xi) in b.iter_mut().zip(self.xi.iter()) {
                let ph = -four * xi * xi * l_norm;
                *bi *= C::from_polar(T::one(), ph);
            }
        }
    }
}

/// sinc(x) = sin(x)/x with the removable singularity handled.
pub fn sinc<T: Scalar>(x: T) -> T {
    if x.abs() < T::of(1e-6) {
        T::one() - x * x / T::of(6.0)
    } else {
        x.sin() / x
    }
}

/// Subcarrier layout in normalized units: N carriers on ξ_k = kπ/T0n,
/// k = -N/2 .. N/2-1, pulse shape sinc(ξ T0n - kπ).
#[derive(Debug, Clone, Copy)]
pub struct CarrierLayout<T: Scalar> {
    pub n_carriers: usize,
    /// burst useful duration in normalized time
    pub t0_norm: T,
    /// burst slot duration (useful + guard) in normalized time
    pub t1_norm: T,
}

impl<T: Scalar> CarrierLayout<T> {
    pub fn xi_center(&self, k: i64) -> T {
        T::PI() * T::of(k as f64) / self.t0_norm
    }

    pub fn k_range(&self) -> impl Iterator<Item = i64> {
        let n = self.n_carriers as i64;
        -n / 2..n / 2
    }

    /// Evaluate the multiplexed spectrum at arbitrary ξ:
    ///   q̂(ξ) = amp · Σ_k c_k sinc(ξ T0n - kπ) · e^{-2 i m ξ T1n}
    /// m is the burst slot index (0 for isolated bursts). Uses
    /// sinc(ξT0n - kπ) = (-1)^k sin(ξT0n) / (ξT0n - kπ), one sine per ξ.
    pub fn evaluate(&self, symbols: &[C<T>], amp: T, burst_index: i64, xi: &[T]) -> Vec<C<T>> {
        assert_eq!(symbols.len(), self.n_carriers);
        let pi = T::PI();
        let mut out = Vec::with_capacity(xi.len());
        for &x in xi {
            let arg = x * self.t0_norm;
            let s = arg.sin();
            let mut acc = C::new(T::zero(), T::zero());
            for (j, k) in self.k_range().enumerate() {
                let y = arg - pi * T::of(k as f64);
                let kernel = if y.abs() < T::of(1e-6) {
                    T::one() - y * y / T::of(6.0)
                } else {
                    let sign = if k & 1 == 0 { T::one() } else { -T::one() };
                    sign * s / y
                };
                acc += symbols[j].scale(kernel);
            }
            if burst_index != 0 {
                let ph = T::of(-2.0 * burst_index as f64) * x * self.t1_norm;
                acc *= C::from_polar(T::one(), ph);
            }
            out.push(acc.scale(amp));
        }
        out
    }
}

/// Build the data-bearing spectrum for one burst on the given ξ grid.
pub fn build_spectrum<T: Scalar>(
    symbols: &[C<T>],
    layout: &CarrierLayout<T>,
    amplitude: T,
    burst_index: i64,
    xi: Vec<T>,
) -> Result<NonlinearSpectrum<T>> {
    if symbols.len() != layout.n_carriers {
        return Err(Error::Input(format!(
            "expected {} symbols, got {}",
            layout.n_carriers,
            symbols.len()
        )));
    }
    let qc = layout.evaluate(symbols, amplitude, burst_index, &xi);
    NonlinearSpectrum::new(xi, qc)
}

/// Dispersion precompensation: rotate by the *inverse* of `fraction` of the
/// channel rotation for a link of normalized length `l_norm`.
/// fraction 0.5 splits the memory symmetrically between both link halves.
pub fn precompensate<T: Scalar>(
    spec: &mut NonlinearSpectrum<T>,
    l_norm: T,
    fraction: T,
) {
    spec.rotate(-l_norm * fraction);
}
