//! Experiment configuration: a flat, diff-friendly `section.key = value`
//! text format (comments with `#`), an exhaustive canonical serialization of
//! every resolved parameter, and a stable hash over it for provenance.
//!
//! Example:
//!
//! ```text
//! system = nfdm
//! frame.preset_n = 64
//! link.beta2_ps2_per_km = -21.7
//! link.mode = lossy-edfa
//! sweep.power_dbm = -8, -6, -4, -2, 0, 2
//! run.n_bursts = 16
//! run.rng_seed = 42
//! ```

use nfdm_core::channel::LinkMode;
use nfdm_core::frame::design_presets;
use nfdm_core::{Error, FrameConfig, ImpairmentConfig, LinkConfig, Result, StepControl};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    Nfdm,
    Ofdm,
}

impl System {
    pub fn name(self) -> &'static str {
        match self {
            System::Nfdm => "nfdm",
            System::Ofdm => "ofdm",
        }
    }
}

/// What varies across the sweep: either launch power at a fixed frame, or
/// the design-table frame (selected by subcarrier count) at a fixed power.
#[derive(Debug, Clone)]
pub enum Sweep {
    PowersDbm(Vec<f64>),
    PresetN(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub system: System,
    pub frame: FrameConfig,
    pub link: LinkConfig,
    pub impairments: ImpairmentConfig,
    pub link_mode: LinkMode,
    pub step: StepControl,
    pub sweep: Sweep,
    /// launch power used by preset sweeps (power sweeps carry their own)
    pub fixed_power_dbm: f64,
    pub n_bursts: usize,
    pub rng_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: System::Nfdm,
            frame: design_presets::<f64>()[0].frame,
            link: LinkConfig::standard(),
            impairments: ImpairmentConfig::default(),
            link_mode: LinkMode::LossyEdfa,
            // experiment-grade stepping; the oracle suites use tighter
            // controls where the tolerance demands it
            step: StepControl {
                max_step: 500.0,
                max_nl_phase: 0.05,
            },
            sweep: Sweep::PowersDbm(vec![-2.0]),
            fixed_power_dbm: -2.0,
            n_bursts: 16,
            rng_seed: 42,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse::<T>()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    let items: Result<Vec<T>> = v
        .split(',')
        .map(|s| parse_num::<T>(key, s))
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(Error::Config(format!("{key}: empty list")));
    }
    Ok(items)
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!("{key}: not a boolean: {other:?}"))),
    }
}

impl ExperimentConfig {
    /// Parse the flat key-value format. Unknown or duplicate keys are hard
    /// errors — silent typos in experiment configs cost real debugging time.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = k.trim().to_string();
            let val = v.trim().to_string();
            if let Some((prev, _)) = kv.get(&key) {
                return Err(Error::Config(format!(
                    "line {}: duplicate key {key} (first on line {})",
                    lineno + 1,
                    prev + 1
                )));
            }
            kv.insert(key, (lineno, val));
        }

        let mut cfg = ExperimentConfig::default();
        let mut sweep: Option<Sweep> = None;
        let mut preset_n: Option<usize> = None;
        // frame fields applied after a possible preset selection
        let mut frame_over: Vec<(String, String)> = Vec::new();

        for (key, (_, v)) in &kv {
            match key.as_str() {
                "system" => {
                    cfg.system = match v.as_str() {
                        "nfdm" => System::Nfdm,
                        "ofdm" => System::Ofdm,
                        other => {
                            return Err(Error::Config(format!("system: unknown {other:?}")))
                        }
                    }
                }
                "frame.preset_n" => preset_n = Some(parse_num(key, v)?),
                "frame.n_subcarriers"
                | "frame.t0_ns"
                | "frame.guard_interval_ns"
                | "frame.pilot_spacing"
                | "frame.training_spacing" => frame_over.push((key.clone(), v.clone())),
                "link.beta2_ps2_per_km" => {
                    cfg.link.beta2 = parse_num::<f64>(key, v)? * 1e-27;
                }
                "link.gamma_per_w_per_km" => {
                    cfg.link.gamma = parse_num::<f64>(key, v)? * 1e-3;
                }
                "link.alpha_db_per_km" => cfg.link.alpha_db_per_km = parse_num(key, v)?,
                "link.span_km" => {
                    cfg.link.span_length = parse_num::<f64>(key, v)? * 1e3;
                }
                "link.n_spans" => cfg.link.n_spans = parse_num(key, v)?,
                "link.noise_figure_db" => cfg.link.noise_figure_db = parse_num(key, v)?,
                "link.wavelength_nm" => {
                    cfg.link.center_wavelength = parse_num::<f64>(key, v)? * 1e-9;
                }
                "link.mode" => {
                    cfg.link_mode = match v.as_str() {
                        "lossy-edfa" => LinkMode::LossyEdfa,
                        "path-averaged-lossless" => LinkMode::PathAveragedLossless,
                        "awgn-only" => LinkMode::AwgnOnly,
                        other => {
                            return Err(Error::Config(format!("link.mode: unknown {other:?}")))
                        }
                    }
                }
                "link.max_step_m" => cfg.step.max_step = parse_num(key, v)?,
                "link.max_nl_phase_rad" => cfg.step.max_nl_phase = parse_num(key, v)?,
                "impairments.enabled" => cfg.impairments.enabled = parse_bool(key, v)?,
                "impairments.dac_rate_gsps" => {
                    cfg.impairments.dac_rate = parse_num::<f64>(key, v)? * 1e9;
                }
                "impairments.adc_rate_gsps" => {
                    cfg.impairments.adc_rate = parse_num::<f64>(key, v)? * 1e9;
                }
                "impairments.dac_bandwidth_ghz" => {
                    cfg.impairments.dac_bandwidth = parse_num::<f64>(key, v)? * 1e9;
                }
                "impairments.enob" => cfg.impairments.enob = parse_num(key, v)?,
                "impairments.laser_linewidth_hz" => {
                    cfg.impairments.laser_linewidth = parse_num(key, v)?;
                }
                "impairments.frequency_offset_hz" => {
                    cfg.impairments.frequency_offset = parse_num(key, v)?;
                }
                "sweep.power_dbm" => {
                    if sweep.is_some() {
                        return Err(Error::Config(
                            "only one of sweep.power_dbm / sweep.n_subcarriers allowed".into(),
                        ));
                    }
                    sweep = Some(Sweep::PowersDbm(parse_list(key, v)?));
                }
                "sweep.n_subcarriers" => {
                    if sweep.is_some() {
                        return Err(Error::Config(
                            "only one of sweep.power_dbm / sweep.n_subcarriers allowed".into(),
                        ));
                    }
                    sweep = Some(Sweep::PresetN(parse_list(key, v)?));
                }
                "run.launch_power_dbm" => cfg.fixed_power_dbm = parse_num(key, v)?,
                "run.n_bursts" => cfg.n_bursts = parse_num(key, v)?,
                "run.rng_seed" => cfg.rng_seed = parse_num(key, v)?,
                other => return Err(Error::Config(format!("unknown key {other:?}"))),
            }
        }

        if let Some(n) = preset_n {
            cfg.frame = preset_frame(n)?;
        }
        for (key, v) in &frame_over {
            match key.as_str() {
                "frame.n_subcarriers" => cfg.frame.n_subcarriers = parse_num(key, v)?,
                "frame.t0_ns" => cfg.frame.t0 = parse_num::<f64>(key, v)? * 1e-9,
                "frame.guard_interval_ns" => {
                    cfg.frame.guard_interval = parse_num::<f64>(key, v)? * 1e-9;
                }
                "frame.pilot_spacing" => cfg.frame.pilot_spacing = parse_num(key, v)?,
                "frame.training_spacing" => cfg.frame.training_spacing = parse_num(key, v)?,
                _ => unreachable!("filtered above"),
            }
        }

        // span/count overrides must flow into the derived total, or the
        // link's own consistency check rejects the config
        cfg.link.total_length = cfg.link.span_length * cfg.link.n_spans as f64;

        cfg.sweep = sweep.ok_or_else(|| {
            Error::Config("config needs sweep.power_dbm or sweep.n_subcarriers".into())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.frame.validate()?;
        self.link.validate()?;
        if self.n_bursts < 1 {
            return Err(Error::Config("run.n_bursts must be >= 1".into()));
        }
        match &self.sweep {
            Sweep::PowersDbm(p) if p.is_empty() => {
                return Err(Error::Config("empty power sweep".into()))
            }
            Sweep::PresetN(ns) => {
                if ns.is_empty() {
                    return Err(Error::Config("empty preset sweep".into()));
                }
                for &n in ns {
                    preset_frame(n)?; // must name a design-table row
                }
            }
            _ => {}
        }
        if !(self.step.max_step > 0.0 && self.step.max_nl_phase > 0.0) {
            return Err(Error::Config("step controls must be positive".into()));
        }
        Ok(())
    }

    /// Every resolved parameter, one `key = value` line, fixed order. This
    /// string *is* the config identity: the hash is computed over it, so a
    /// parameter change and only a parameter change moves the hash.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let kv = |s: &mut String, k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv(&mut s, "system", self.system.name().to_string());
        kv(&mut s, "frame.n_subcarriers", self.frame.n_subcarriers.to_string());
        kv(&mut s, "frame.t0_s", format!("{:e}", self.frame.t0));
        kv(&mut s, "frame.guard_interval_s", format!("{:e}", self.frame.guard_interval));
        kv(&mut s, "frame.bits_per_symbol", self.frame.bits_per_symbol.to_string());
        kv(&mut s, "frame.pilot_spacing", self.frame.pilot_spacing.to_string());
        kv(&mut s, "frame.training_spacing", self.frame.training_spacing.to_string());
        kv(&mut s, "link.beta2_s2_per_m", format!("{:e}", self.link.beta2));
        kv(&mut s, "link.gamma_per_w_m", format!("{:e}", self.link.gamma));
        kv(&mut s, "link.alpha_db_per_km", format!("{:e}", self.link.alpha_db_per_km));
        kv(&mut s, "link.span_m", format!("{:e}", self.link.span_length));
        kv(&mut s, "link.n_spans", self.link.n_spans.to_string());
        kv(&mut s, "link.noise_figure_db", format!("{:e}", self.link.noise_figure_db));
        kv(&mut s, "link.total_length_m", format!("{:e}", self.link.total_length));
        kv(&mut s, "link.wavelength_m", format!("{:e}", self.link.center_wavelength));
        kv(&mut s, "link.mode", format!("{:?}", self.link_mode));
        kv(&mut s, "link.max_step_m", format!("{:e}", self.step.max_step));
        kv(&mut s, "link.max_nl_phase_rad", format!("{:e}", self.step.max_nl_phase));
        let imp = &self.impairments;
        kv(&mut s, "impairments.enabled", imp.enabled.to_string());
        kv(&mut s, "impairments.dac_rate_hz", format!("{:e}", imp.dac_rate));
        kv(&mut s, "impairments.adc_rate_hz", format!("{:e}", imp.adc_rate));
        kv(&mut s, "impairments.dac_bandwidth_hz", format!("{:e}", imp.dac_bandwidth));
        kv(&mut s, "impairments.enob", format!("{:e}", imp.enob));
        kv(&mut s, "impairments.laser_linewidth_hz", format!("{:e}", imp.laser_linewidth));
        kv(&mut s, "impairments.frequency_offset_hz", format!("{:e}", imp.frequency_offset));
        match &self.sweep {
            Sweep::PowersDbm(p) => {
                let list: Vec<String> = p.iter().map(|x| format!("{x:e}")).collect();
                kv(&mut s, "sweep.power_dbm", list.join(", "));
            }
            Sweep::PresetN(ns) => {
                let list: Vec<String> = ns.iter().map(|x| x.to_string()).collect();
                kv(&mut s, "sweep.n_subcarriers", list.join(", "));
            }
        }
        kv(&mut s, "run.launch_power_dbm", format!("{:e}", self.fixed_power_dbm));
        kv(&mut s, "run.n_bursts", self.n_bursts.to_string());
        kv(&mut s, "run.rng_seed", self.rng_seed.to_string());
        s
    }

    /// 16-hex-char provenance tag over the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Design-table frame for a given subcarrier count.
pub fn preset_frame(n: usize) -> Result<FrameConfig> {
    design_presets::<f64>()
        .into_iter()
        .find(|p| p.frame.n_subcarriers == n)
        .map(|p| p.frame)
        .ok_or_else(|| {
            Error::Config(format!(
                "no design-table row with {n} subcarriers (rows: 64, 132, 154, 176, 198, 222)"
            ))
        })
}
