//! Burst framing: N subcarriers ride a useful window T0, separated by a
//! guard interval sized for the dispersive channel memory; the slot length is
//! T1 = T0 + GI. All presets share the normalized useful window T0n = 32
//! (time_scale Ts = T0/32), so the normalized carrier grid ξ_k = kπ/32 is
//! common and only the k range grows with N.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectrum::CarrierLayout;

pub const T0_NORM: f64 = 32.0;
/// normalized lattice pitch h = LATTICE_SPAN / N keeps the sampling margin
/// (relative to the occupied ξ band ±πN/64) identical for every preset
pub const LATTICE_SPAN: f64 = 12.0;

#[derive(Debug, Clone, Copy)]
pub struct FrameConfig<T: Scalar> {
    pub n_subcarriers: usize,
    /// useful burst duration, seconds
    pub t0: T,
    /// guard interval, seconds
    pub guard_interval: T,
    pub bits_per_symbol: usize,
    /// every `pilot_spacing`-th subcarrier carries a known pilot
    pub pilot_spacing: usize,
    /// every `training_spacing`-th burst is fully known (equalizer training)
    pub training_spacing: usize,
}

impl<T: Scalar> FrameConfig<T> {
    pub fn new(n_subcarriers: usize, t0: T, guard_interval: T) -> Self {
        Self {
            n_subcarriers,
            t0,
            guard_interval,
            bits_per_symbol: crate::qam::BITS_PER_SYMBOL,
            pilot_spacing: 16,
            training_spacing: 32,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 || self.t0 <= T::zero() || self.guard_interval < T::zero() {
            return Err(Error::Input("degenerate frame".into()));
        }
        if self.pilot_spacing == 0 || self.training_spacing == 0 {
            return Err(Error::Input("pilot/training spacing must be >= 1".into()));
        }
        // phase tracking needs at least two pilots per burst
        if self.n_subcarriers.div_ceil(self.pilot_spacing) < 2 {
            return Err(Error::Config(format!(
                "pilot spacing {} leaves fewer than 2 pilots in {} subcarriers",
                self.pilot_spacing, self.n_subcarriers
            )));
        }
        Ok(())
    }

    /// slot duration T1 = T0 + GI
    pub fn t1(&self) -> T {
        self.t0 + self.guard_interval
    }

    /// seconds per normalized time unit: Ts = T0 / 32
    pub fn time_scale(&self) -> T {
        self.t0 / T::of(T0_NORM)
    }

    pub fn t0_norm(&self) -> T {
        T::of(T0_NORM)
    }

    pub fn t1_norm(&self) -> T {
        self.t1() / self.time_scale()
    }

    pub fn carrier_layout(&self) -> CarrierLayout<T> {
        CarrierLayout {
            n_carriers: self.n_subcarriers,
            t0_norm: self.t0_norm(),
            t1_norm: self.t1_norm(),
        }
    }

    /// normalized scattering-lattice pitch
    pub fn lattice_h(&self) -> T {
        T::of(LATTICE_SPAN) / T::of(self.n_subcarriers as f64)
    }

    /// samples per slot on the lattice
    pub fn slot_samples(&self) -> usize {
        (self.t1_norm() / self.lattice_h())
            .round()
            .to_f64_lossy() as usize
    }

    /// physical lattice sample rate
    pub fn lattice_rate(&self) -> T {
        T::one() / (self.lattice_h() * self.time_scale())
    }

    /// gross bit rate N·bps/T1
    pub fn gross_rate(&self) -> T {
        T::of((self.n_subcarriers * self.bits_per_symbol) as f64) / self.t1()
    }

    /// occupied optical bandwidth N/T0
    pub fn bandwidth(&self) -> T {
        T::of(self.n_subcarriers as f64) / self.t0
    }

    /// spectral efficiency for a user-supplied net (post-FEC) bit rate
    pub fn spectral_efficiency(&self, net_bit_rate: T) -> T {
        net_bit_rate / self.bandwidth()
    }

    pub fn is_pilot(&self, subcarrier_position: usize) -> bool {
        subcarrier_position % self.pilot_spacing == 0
    }

    pub fn is_training_burst(&self, burst_index: usize) -> bool {
        burst_index % self.training_spacing == 0
    }

    pub fn pilot_positions(&self) -> Vec<usize> {
        (0..self.n_subcarriers)
            .filter(|&j| self.is_pilot(j))
            .collect()
    }
}

/// One row of the design table: the frame plus the published round-number
/// performance figures it was sized for.
#[derive(Debug, Clone, Copy)]
pub struct DesignPreset<T: Scalar> {
    pub frame: FrameConfig<T>,
    /// published gross rate, Gb/s (rounded in the table)
    pub gross_gbps: f64,
    /// published occupied bandwidth, GHz
    pub bandwidth_ghz: f64,
    /// published net spectral efficiency, bit/s/Hz
    pub spectral_efficiency: f64,
}

/// The six design points, from the 32 GHz desk-scale frame up to 60 GHz.
pub fn design_presets<T: Scalar>() -> Vec<DesignPreset<T>> {
    let row = |t0_ns: f64, gi_ns: f64, n: usize, gross: f64, bw: f64, se: f64| DesignPreset {
        frame: FrameConfig::new(n, T::of(t0_ns * 1e-9), T::of(gi_ns * 1e-9)),
        gross_gbps: gross,
        bandwidth_ghz: bw,
        spectral_efficiency: se,
    };
    vec![
        row(2.0, 4.0, 64, 53.0, 32.0, 1.56),
        row(3.3, 3.3, 132, 100.0, 40.0, 2.30),
        row(3.5, 3.5, 154, 110.0, 44.0, 2.24),
        row(3.5, 3.5, 176, 125.0, 50.0, 2.17),
        row(3.6, 3.6, 198, 137.0, 55.0, 2.12),
        row(3.7, 3.7, 222, 150.0, 60.0, 2.08),
    ]
}
