//! Deterministic file output: CSV trajectories and the meta.txt key-value
//! dump. Floats are written in scientific notation at a fixed number of
//! significant digits so identical configs produce byte-identical files.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

/// Scientific notation with `precision` significant digits (17 round-trips
/// f64 exactly).
pub fn fmt_float(x: f64, precision: usize) -> String {
    format!("{:.*e}", precision.saturating_sub(1), x)
}

/// Local exponent column: ½·dlnσ²/dlnt by the centered stencil, blank at the
/// endpoints and wherever the stencil would take a log of a nonpositive
/// number.
pub fn alpha_column(times: &[f64], sigma2: &[f64]) -> Vec<Option<f64>> {
    let n = times.len();
    let mut out = vec![None; n];
    for i in 1..n.saturating_sub(1) {
        let ok = times[i - 1] > 0.0
            && times[i + 1] > 0.0
            && sigma2[i - 1] > 0.0
            && sigma2[i + 1] > 0.0;
        if ok {
            let dlns = sigma2[i + 1].ln() - sigma2[i - 1].ln();
            let dlnt = times[i + 1].ln() - times[i - 1].ln();
            out[i] = Some(0.5 * dlns / dlnt);
        }
    }
    out
}

/// Writes `t,sigma2,alpha` rows with `\n` endings.
pub fn write_trajectory_csv(
    path: &Path,
    times: &[f64],
    sigma2: &[f64],
    precision: usize,
) -> io::Result<()> {
    let alphas = alpha_column(times, sigma2);
    let mut buf = String::from("t,sigma2,alpha\n");
    for i in 0..times.len() {
        buf.push_str(&fmt_float(times[i], precision));
        buf.push(',');
        buf.push_str(&fmt_float(sigma2[i], precision));
        buf.push(',');
        if let Some(a) = alphas[i] {
            buf.push_str(&fmt_float(a, precision));
        }
        buf.push('\n');
    }
    atomic_write(path, buf.as_bytes())
}

/// Writes `key = value` lines.
pub fn write_meta(path: &Path, lines: &[(String, String)]) -> io::Result<()> {
    let mut buf = String::new();
    for (k, v) in lines {
        buf.push_str(k);
        buf.push_str(" = ");
        buf.push_str(v);
        buf.push('\n');
    }
    atomic_write(path, buf.as_bytes())
}

fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
