//! Complex-baseband time signal plus a small binary waveform file format so
//! captures can be moved in and out of the simulator (`transform` subcommand,
//! offline debugging).

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C};
use std::io::{Read, Write};
use std::path::Path;

/// Whether samples are in physical units (field envelope, W^1/2) or in the
/// dimensionless units of the normalized NLSE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Physical,
    Normalized,
}

#[derive(Debug, Clone)]
pub struct TimeSignal<T: Scalar> {
    pub samples: Vec<C<T>>,
    /// samples per second (physical) or samples per normalized time unit
    pub sample_rate: T,
    pub units: Units,
    /// time of samples[0]; same units as 1/sample_rate
    pub t0_offset: T,
}

impl<T: Scalar> TimeSignal<T> {
    pub fn new(samples: Vec<C<T>>, sample_rate: T, units: Units, t0_offset: T) -> Self {
        Self {
            samples,
            sample_rate,
            units,
            t0_offset,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> T {
        T::one() / self.sample_rate
    }

    pub fn duration(&self) -> T {
        T::of(self.len() as f64) * self.dt()
    }

    /// Mean |A|^2. In physical units with A in sqrt(W) this is watts.
    pub fn mean_power(&self) -> T {
        if self.samples.is_empty() {
            return T::zero();
        }
        let e: T = self
            .samples
            .iter()
            .fold(T::zero(), |acc, s| acc + s.norm_sqr());
        e / T::of(self.len() as f64)
    }

    /// ∫|A|^2 dt as a Riemann sum.
    pub fn energy(&self) -> T {
        let e: T = self
            .samples
            .iter()
            .fold(T::zero(), |acc, s| acc + s.norm_sqr());
        e * self.dt()
    }

    /// Sample times.
    pub fn time_grid(&self) -> Vec<T> {
        let dt = self.dt();
        (0..self.len())
            .map(|i| self.t0_offset + T::of(i as f64) * dt)
            .collect()
    }
}

const MAGIC: &[u8; 4] = b"NFDM";
const VERSION: u32 = 1;

/// Serialize to the interchange format: little-endian, magic "NFDM",
/// version u32, units u8 (0 = physical, 1 = normalized), sample_rate f64,
/// n_samples u64, then interleaved (re, im) f64 pairs.
pub fn write_waveform(path: &Path, sig: &TimeSignal<f64>) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[match sig.units {
        Units::Physical => 0u8,
        Units::Normalized => 1u8,
    }])?;
    w.write_all(&sig.sample_rate.to_le_bytes())?;
    w.write_all(&(sig.len() as u64).to_le_bytes())?;
    for s in &sig.samples {
        w.write_all(&s.re.to_le_bytes())?;
        w.write_all(&s.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_waveform(path: &Path) -> Result<TimeSignal<f64>> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::WaveformFormat(format!(
            "bad magic {:02x?}, expected \"NFDM\"",
            magic
        )));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(Error::WaveformFormat(format!(
            "unsupported version {version}"
        )));
    }
    let mut b1 = [0u8; 1];
    r.read_exact(&mut b1)?;
    let units = match b1[0] {
        0 => Units::Physical,
        1 => Units::Normalized,
        u => return Err(Error::WaveformFormat(format!("unknown units flag {u}"))),
    };
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let sample_rate = f64::from_le_bytes(b8);
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::WaveformFormat(format!(
            "bad sample rate {sample_rate}"
        )));
    }
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        samples.push(C::new(re, im));
    }
    // the format carries no t0; callers re-anchor if they need absolute time
    Ok(TimeSignal::new(samples, sample_rate, units, 0.0))
}
