//! Parameter sweeps: independent scenario runs per value, each in its own
//! subdirectory, plus a summary CSV.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use crate::config::{parse_raw, resolve, NUMERIC_KEYS};
use crate::output::{fmt_float, write_meta};
use crate::runner::{run_config, write_outputs, RunOutput};
use crate::CliError;

/// One summary row of `sweep.csv`.
struct SweepRow {
    value: f64,
    final_sigma2: f64,
    alpha_early: Option<f64>,
    t_cross: f64,
}

/// Runs the base config once per value of `key`, in parallel, and writes
/// `sweep.csv` with the final dispersion, fitted early-time exponent and
/// t_cross per row. The summary uses the first mode listed in `modes`.
pub fn sweep_path(
    config_path: &Path,
    key: &str,
    values_arg: &str,
    out_override: Option<&Path>,
) -> Result<PathBuf, CliError> {
    if !NUMERIC_KEYS.contains(&key) {
        return Err(CliError::Config(format!(
            "`{key}` is not a sweepable numeric config field"
        )));
    }
    let values: Vec<String> = values_arg
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    if values.is_empty() {
        return Err(CliError::Config("empty sweep value list".into()));
    }
    for v in &values {
        v.parse::<f64>()
            .map_err(|_| CliError::Config(format!("sweep value `{v}` is not a number")))?;
    }

    let text = fs::read_to_string(config_path).map_err(|e| {
        CliError::Config(format!("cannot read `{}`: {e}", config_path.display()))
    })?;
    let base_map = parse_raw(&text)?;
    let base_cfg = resolve(base_map.clone())?;
    let base_out = out_override
        .map(Path::to_path_buf)
        .unwrap_or_else(|| base_cfg.output_dir.clone());

    // validate every entry before spawning anything; sweeps fail closed
    let mut jobs = Vec::new();
    for v in &values {
        let mut map = base_map.clone();
        map.insert(key.to_string(), v.clone());
        let mut cfg = resolve(map)?;
        cfg.output_dir = base_out.join(format!("{key}={v}"));
        jobs.push(cfg);
    }

    let results: Vec<Result<SweepRow, CliError>> = thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .into_iter()
            .map(|cfg| {
                scope.spawn(move || -> Result<SweepRow, CliError> {
                    let t_cross = cfg.params.t_cross();
                    let out: RunOutput = run_config(cfg)?;
                    write_outputs(&out)?;
                    let first = out
                        .curves
                        .first()
                        .ok_or_else(|| CliError::Solver("run produced no curves".into()))?;
                    Ok(SweepRow {
                        value: 0.0, // filled by the caller in input order
                        final_sigma2: *first.sigma2.last().unwrap(),
                        alpha_early: early_exponent_fit(&out.t_grid, &first.sigma2),
                        t_cross,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });

    let mut rows = Vec::with_capacity(values.len());
    for (v, res) in values.iter().zip(results) {
        let mut row = res?;
        row.value = v.parse::<f64>().unwrap();
        rows.push(row);
    }

    fs::create_dir_all(&base_out)
        .map_err(|e| CliError::Solver(format!("cannot create `{}`: {e}", base_out.display())))?;
    let mut csv = String::from("value,final_sigma2,alpha_early,t_cross\n");
    for row in &rows {
        csv.push_str(&fmt_float(row.value, 17));
        csv.push(',');
        csv.push_str(&fmt_float(row.final_sigma2, 17));
        csv.push(',');
        if let Some(a) = row.alpha_early {
            csv.push_str(&fmt_float(a, 17));
        }
        csv.push(',');
        csv.push_str(&fmt_float(row.t_cross, 17));
        csv.push('\n');
    }
    fs::write(base_out.join("sweep.csv"), csv)
        .map_err(|e| CliError::Solver(format!("write failed: {e}")))?;
    // the sweep axis, for downstream plotting
    write_meta(
        &base_out.join("sweep_meta.txt"),
        &[
            ("sweep.key".to_string(), key.to_string()),
            ("sweep.values".to_string(), values.join(",")),
        ],
    )
    .map_err(|e| CliError::Solver(format!("write failed: {e}")))?;
    Ok(base_out)
}

/// Least-squares slope of ln σ against ln t over the first decade of
/// positive samples; `None` when fewer than three usable points exist.
fn early_exponent_fit(times: &[f64], sigma2: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(sigma2)
        .filter(|(&t, &s)| t > 0.0 && s > 0.0)
        .map(|(&t, &s)| (t.ln(), 0.5 * s.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let cutoff = pts[0].0 + std::f64::consts::LN_10;
    let mut window: Vec<(f64, f64)> = pts.iter().copied().take_while(|p| p.0 <= cutoff).collect();
    if window.len() < 3 {
        window = pts[..3].to_vec();
    }
    let n = window.len() as f64;
    let sx: f64 = window.iter().map(|p| p.0).sum();
    let sy: f64 = window.iter().map(|p| p.1).sum();
    let sxx: f64 = window.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = window.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}
