//! Mapping between the physical field A(t, z) (sqrt-W envelope, seconds,
//! meters) and the dimensionless q(t', z') of the normalized focusing NLSE
//! i q_z' = q_t't' + 2 |q|² q.
//!
//! With the crate's FFT sign conventions the physical anomalous-dispersion
//! equation maps onto this via *conjugation*:
//! q(t', z') = sqrt(γ z_scale / 2) · conj(A), with t' = t/Ts, z' = z/z_scale
//! and z_scale = 2 Ts² / |β2|.
//!
//! Dropping the conjugate flips the sign of dispersion relative to the
//! nonlinearity and quietly turns the focusing problem defocusing — the
//! scattering transforms then see a completely different signal.

use crate::channel::LinkConfig;
use crate::scalar::{Scalar, C};
use crate::signal::{TimeSignal, Units};

#[derive(Debug, Clone, Copy)]
pub struct Normalization<T: Scalar> {
    /// Ts, seconds per normalized time unit
    pub time_scale: T,
    /// meters per normalized distance unit, 2 Ts²/|β2|
    pub z_scale: T,
    /// κ in q = κ conj(A); 1/sqrt(W)
    pub amp_scale: T,
}

impl<T: Scalar> Normalization<T> {
    pub fn new(beta2: T, gamma: T, time_scale: T) -> Self {
        let z_scale = T::of(2.0) * time_scale * time_scale / beta2.abs();
        let amp_scale = (gamma * z_scale / T::of(2.0)).sqrt();
        Self {
            time_scale,
            z_scale,
            amp_scale,
        }
    }

    /// Normalization against the link's physical γ.
    pub fn for_link(link: &LinkConfig<T>, time_scale: T) -> Self {
        Self::new(link.beta2, link.gamma, time_scale)
    }

    /// Normalization against the span's path-averaged γ — the right choice
    /// when the lossy+EDFA link is treated as approximately lossless.
    pub fn for_link_path_averaged(link: &LinkConfig<T>, time_scale: T) -> Self {
        Self::new(link.beta2, link.path_averaged_gamma(), time_scale)
    }

    pub fn length_to_normalized(&self, length_m: T) -> T {
        length_m / self.z_scale
    }

    /// Physical sqrt-W envelope -> dimensionless q (with the conjugation).
    pub fn normalize(&self, sig: &TimeSignal<T>) -> TimeSignal<T> {
        assert_eq!(sig.units, Units::Physical, "normalize expects physical units");
        let k = self.amp_scale;
        let samples: Vec<C<T>> = sig.samples.iter().map(|a| a.conj().scale(k)).collect();
        TimeSignal::new(
            samples,
            sig.sample_rate * self.time_scale,
            Units::Normalized,
            sig.t0_offset / self.time_scale,
        )
    }

    /// Dimensionless q -> physical sqrt-W envelope.
    pub fn denormalize(&self, sig: &TimeSignal<T>) -> TimeSignal<T> {
        assert_eq!(
            sig.units,
            Units::Normalized,
            "denormalize expects normalized units"
        );
        let k = T::one() / self.amp_scale;
        let samples: Vec<C<T>> = sig.samples.iter().map(|q| q.conj().scale(k)).collect();
        TimeSignal::new(
            samples,
            sig.sample_rate / self.time_scale,
            Units::Physical,
            sig.t0_offset * self.time_scale,
        )
    }
}

pub fn dbm_to_watts<T: Scalar>(dbm: T) -> T {
    T::of(1e-3) * T::of(10.0).powf(dbm / T::of(10.0))
}

pub fn watts_to_dbm<T: Scalar>(watts: T) -> T {
    T::of(10.0) * (watts / T::of(1e-3)).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn z_scale_reference_value() {
        // Ts = 1 ps at 21.7 ps²/km gives 92.2 m
        let n = Normalization::new(-2.17e-26f64, 1.3e-3, 1e-12);
        assert!((n.z_scale - 92.2).abs() < 0.1, "z_scale {}", n.z_scale);
    }

    #[test]
    fn normalize_round_trips() {
        let link = LinkConfig::<f64>::standard();
        let norm = Normalization::for_link(&link, 62.5e-12);
        let samples: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64 * 0.3).sin() * 1e-2, (i as f64 * 0.2).cos() * 1e-2))
            .collect();
        let sig = TimeSignal::new(samples, 85.333e9, Units::Physical, -3e-10);
        let back = norm.denormalize(&norm.normalize(&sig));
        assert_eq!(back.units, Units::Physical);
        assert!((back.sample_rate - sig.sample_rate).abs() < 1e-3);
        assert!((back.t0_offset - sig.t0_offset).abs() < 1e-22);
        for (a, b) in sig.samples.iter().zip(back.samples.iter()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn dbm_round_trip() {
        for d in [-10.0f64, -2.0, 0.0, 3.0] {
            assert!((watts_to_dbm(dbm_to_watts(d)) - d).abs() < 1e-12);
        }
        assert!((dbm_to_watts(0.0f64) - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn energy_maps_with_kappa_squared_over_ts() {
        let link = LinkConfig::<f64>::standard();
        let norm = Normalization::for_link_path_averaged(&link, 62.5e-12);
        let sig = TimeSignal::new(
            vec![Complex64::new(2e-2, 1e-2); 128],
            85.333e9,
            Units::Physical,
            0.0,
        );
        let q = norm.normalize(&sig);
        let expect = sig.energy() * norm.amp_scale.powi(2) / norm.time_scale;
        assert!((q.energy() - expect).abs() < 1e-12 * expect);
    }
}
