use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nfdm_core::frame::design_presets;
use nfdm_core::nft::forward_nft;
use nfdm_core::signal::{read_waveform, write_waveform, Units};
use nfdm_core::{NonlinearSpectrum, TimeGrid};
use nfdm_sim::config::ExperimentConfig;
use nfdm_sim::experiment::run_experiment;
use nfdm_sim::results::{fmt12, write_csv, write_plot_data};
use nfdm_sim::selftest;

#[derive(Parser)]
#[command(name = "nfdm-sim", about = "NFDM/OFDM fiber transmission experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file; writes results.csv and
    /// per-metric plot data
    Run {
        /// plain-text `key = value` config
        config: PathBuf,
        /// override run.rng_seed from the config
        #[arg(long)]
        seed: Option<u64>,
        /// worker threads (default: all cores)
        #[arg(long)]
        threads: Option<usize>,
        /// output directory (default: current dir)
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Print the built-in frame design table
    Presets,
    /// Check every numerical engine against independent oracles
    Selftest {
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Scattering transform of a stored waveform (or synthesis from a
    /// stored spectrum with --inverse)
    Transform {
        /// waveform file, or spectrum CSV with --inverse
        input: PathBuf,
        /// synthesize a waveform from an `xi,re,im` spectrum CSV
        #[arg(long)]
        inverse: bool,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Run {
            config,
            seed,
            threads,
            out_dir,
        } => {
            set_threads(threads)?;
            let text = std::fs::read_to_string(&config)?;
            let mut cfg = ExperimentConfig::parse(&text)?;
            if let Some(s) = seed {
                cfg.rng_seed = s;
            }
            run(&cfg, &out_dir)
        }
        Command::Presets => {
            presets();
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { threads } => {
            set_threads(threads)?;
            let failures = selftest::run_all();
            if failures == 0 {
                println!("selftest: all checks passed");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("selftest: {failures} check(s) FAILED");
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Transform {
            input,
            inverse,
            out_dir,
        } => transform(&input, inverse, &out_dir),
    }
}

fn set_threads(threads: Option<usize>) -> Result<(), Box<dyn std::error::Error>> {
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()?;
    }
    Ok(())
}

fn run(cfg: &ExperimentConfig, out_dir: &PathBuf) -> Result<ExitCode, Box<dyn std::error::Error>> {
    std::fs::create_dir_all(out_dir)?;
    println!(
        "{} sweep, {} bursts/point, seed {}, config {}",
        cfg.system.name(),
        cfg.n_bursts,
        cfg.rng_seed,
        cfg.hash()
    );
    let results = run_experiment(cfg);
    let mut any_failed = false;
    for r in &results {
        match &r.failed {
            None => println!(
                "  x={:<8} launch {:+.2} dBm  ber {:.3e}  q {:.2} dB  gmi {:.3}  evm {:.1} dB  ({} bits)",
                r.x, r.power_dbm, r.ber, r.q_db, r.gmi, r.evm_db, r.n_bits
            ),
            Some(msg) => {
                any_failed = true;
                println!("  x={:<8} FAILED: {msg}", r.x);
            }
        }
    }
    write_csv(&out_dir.join("results.csv"), &results)?;
    write_plot_data(out_dir, cfg.system.name(), &results)?;
    println!("wrote {}", out_dir.join("results.csv").display());
    Ok(if any_failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn presets() {
    println!(
        "{:>6} {:>8} {:>8} {:>12} {:>12} {:>10}",
        "N", "T0 (ns)", "GI (ns)", "gross Gb/s", "BW (GHz)", "SE b/s/Hz"
    );
    for p in design_presets::<f64>() {
        println!(
            "{:>6} {:>8.1} {:>8.1} {:>12.0} {:>12.0} {:>10.2}",
            p.frame.n_subcarriers,
            p.frame.t0 * 1e9,
            p.frame.guard_interval * 1e9,
            p.gross_gbps,
            p.bandwidth_ghz,
            p.spectral_efficiency
        );
    }
}

fn transform(
    input: &PathBuf,
    inverse: bool,
    out_dir: &PathBuf,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    std::fs::create_dir_all(out_dir)?;
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("out")
        .to_string();
    if inverse {
        let spec = read_spectrum_csv(input)?;
        let m = spec.len();
        let dxi = spec.xi[1] - spec.xi[0];
        // invert the grid relation dxi = pi / (h m): synthesis pitch from
        // the spectral one
        let h = std::f64::consts::PI / (dxi * m as f64);
        let grid = TimeGrid {
            t_start: -(m as f64) / 2.0 * h + h / 2.0,
            dt: h,
            n_samples: m,
        };
        let sig = nfdm_core::inft::inverse_nft(&spec, &grid, None, None)?;
        let path = out_dir.join(format!("{stem}.waveform"));
        write_waveform(&path, &sig)?;
        println!(
            "synthesized {} samples at pitch {:.6e} -> {}",
            m,
            h,
            path.display()
        );
    } else {
        let sig = read_waveform(input)?;
        if sig.units != Units::Normalized {
            return Err("waveform must be in normalized units (physical \
                        waveforms depend on a link context to normalize)"
                .into());
        }
        let n = sig.len();
        let m = n.next_power_of_two();
        let h = sig.dt();
        let dxi = std::f64::consts::PI / (h * m as f64);
        let xi: Vec<f64> = (0..m)
            .map(|i| (i as f64 - m as f64 / 2.0) * dxi)
            .collect();
        let spec = forward_nft(&sig, &xi, 1)?;
        let path = out_dir.join(format!("{stem}.spectrum.csv"));
        let mut out = String::from("xi,re,im\n");
        for (i, q) in spec.qc.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt12(spec.xi[i]),
                fmt12(q.re),
                fmt12(q.im)
            ));
        }
        std::fs::write(&path, out)?;
        println!(
            "scattered {} samples onto {} xi points -> {}",
            n,
            m,
            path.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn read_spectrum_csv(path: &PathBuf) -> Result<NonlinearSpectrum, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(path)?;
    let mut xi = Vec::new();
    let mut qc = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (ln == 0 && line.starts_with("xi")) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(format!("line {}: expected xi,re,im", ln + 1).into());
        }
        xi.push(cols[0].trim().parse::<f64>()?);
        qc.push(nfdm_core::Complex::new(
            cols[1].trim().parse()?,
            cols[2].trim().parse()?,
        ));
    }
    if xi.len() < 2 {
        return Err("spectrum needs at least two xi points".into());
    }
    let d0 = xi[1] - xi[0];
    for w in xi.windows(2) {
        if ((w[1] - w[0]) - d0).abs() > 1e-9 * d0.abs() {
            return Err("xi grid must be uniform for synthesis".into());
        }
    }
    Ok(NonlinearSpectrum::new(xi, qc)?)
}
