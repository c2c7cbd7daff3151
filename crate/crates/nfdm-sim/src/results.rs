//! Result persistence: the sweep CSV and bare (x, y) series files for
//! generic plotting tools. All numeric formatting is fixed at 12 significant
//! digits so reruns are byte-comparable and parsing returns the same values.

use crate::experiment::RunResult;
use nfdm_core::Result;
use std::path::Path;

/// 12 significant digits, locale-free, stable. NaN (failed points) prints
/// as `nan`, which `str::parse::<f64>` accepts on the way back in.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.11e}")
    }
}

pub fn csv_string(results: &[RunResult]) -> String {
    let mut s = String::from("power_dbm,ber,q_db,gmi,evm_db,seed,config-hash\n");
    for r in results {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt12(r.power_dbm),
            fmt12(r.ber),
            fmt12(r.q_db),
            fmt12(r.gmi),
            fmt12(r.evm_db),
            r.seed,
            r.config_hash
        ));
    }
    s
}

pub fn write_csv(path: &Path, results: &[RunResult]) -> Result<()> {
    std::fs::write(path, csv_string(results))?;
    Ok(())
}

/// One `x y` pair per line per metric, failed points skipped — gnuplot,
/// matplotlib and friends read this without any adapter.
pub fn plot_series(results: &[RunResult], metric: fn(&RunResult) -> f64) -> String {
    let mut s = String::new();
    for r in results {
        if r.failed.is_some() {
            continue;
        }
        s.push_str(&format!("{} {}\n", fmt12(r.x), fmt12(metric(r))));
    }
    s
}

pub fn write_plot_data(dir: &Path, stem: &str, results: &[RunResult]) -> Result<()> {
    std::fs::write(
        dir.join(format!("{stem}_q_db.dat")),
        plot_series(results, |r| r.q_db),
    )?;
    std::fs::write(
        dir.join(format!("{stem}_gmi.dat")),
        plot_series(results, |r| r.gmi),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(power: f64, ber: f64) -> RunResult {
        RunResult {
            x: power,
            power_dbm: power,
            ber,
            q_db: 9.8,
            gmi: 4.32109876543,
            evm_db: -17.5,
            seed: 42,
            config_hash: "0123456789abcdef".into(),
            n_bits: 4800,
            bit_errors: 5,
            failed: None,
        }
    }

    #[test]
    fn header_only_when_empty() {
        assert_eq!(csv_string(&[]), "power_dbm,ber,q_db,gmi,evm_db,seed,config-hash\n");
    }

    #[test]
    fn csv_round_trips_to_12_digits() {
        let rows = vec![row(-2.0, 1.0416666666666e-3), row(0.0, 0.0)];
        let text = csv_string(&rows);
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert_eq!(header, "power_dbm,ber,q_db,gmi,evm_db,seed,config-hash");
        for (line, orig) in lines.zip(rows.iter()) {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f.len(), 7);
            let back: f64 = f[1].parse().unwrap();
            let rel = if orig.ber == 0.0 {
                back.abs()
            } else {
                ((back - orig.ber) / orig.ber).abs()
            };
            assert!(rel < 1e-11, "ber {} -> {} (rel {rel:.2e})", orig.ber, back);
            let gmi: f64 = f[3].parse().unwrap();
            assert!(((gmi - orig.gmi) / orig.gmi).abs() < 1e-11);
            assert_eq!(f[5], "42");
            assert_eq!(f[6], "0123456789abcdef");
        }
    }

    #[test]
    fn failed_points_are_nan_rows_and_skipped_in_plots() {
        let mut bad = row(2.0, f64::NAN);
        bad.q_db = f64::NAN;
        bad.failed = Some("boom".into());
        let rows = vec![row(0.0, 1e-3), bad];
        let text = csv_string(&rows);
        assert!(text.lines().nth(2).unwrap().contains("nan"));
        let series = plot_series(&rows, |r| r.q_db);
        assert_eq!(series.lines().count(), 1, "failed point must not plot");
    }
}
