//! End-to-end checks of the `qsd` binary: exit codes, file formats,
//! determinism and the meta round trip.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qsd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qsd"))
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run_ok(config: &Path, out: &Path) -> Output {
    let output = qsd()
        .args(["run", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn qsd");
    assert!(
        output.status.success(),
        "qsd run failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn read(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn run_writes_expected_files_with_csv_header() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(&repo_config("free.conf"), tmp.path());
    for mode in ["closed_form", "constant_sigma", "elementary_approx"] {
        let csv = fs::read_to_string(tmp.path().join(format!("free_{mode}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,sigma2,alpha");
        // endpoints carry a blank alpha
        let first = lines.next().unwrap();
        assert!(first.ends_with(','), "first row should have blank alpha");
        assert_eq!(csv.lines().count(), 201);
    }
    let meta = fs::read_to_string(tmp.path().join("meta.txt")).unwrap();
    assert!(meta.contains("config.scenario = free"));
    assert!(meta.contains("derived.t_cross = 1.2500000000000000e-1"));
}

#[test]
fn identical_configs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_ok(&repo_config("free.conf"), a.path());
    run_ok(&repo_config("free.conf"), b.path());
    for mode in ["closed_form", "constant_sigma", "elementary_approx"] {
        let name = format!("free_{mode}.csv");
        assert_eq!(
            read(&a.path().join(&name)),
            read(&b.path().join(&name)),
            "{name} differs between runs"
        );
    }
    // meta differs only through the output directory echo
    let meta_a = fs::read_to_string(a.path().join("meta.txt")).unwrap();
    let meta_b = fs::read_to_string(b.path().join("meta.txt")).unwrap();
    let strip = |m: &str| {
        m.lines()
            .filter(|l| !l.starts_with("config.output.dir"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&meta_a), strip(&meta_b));
}

#[test]
fn meta_round_trip_reproduces_the_outputs() {
    let first = tempfile::tempdir().unwrap();
    run_ok(&repo_config("harmonic.conf"), first.path());
    let meta = fs::read_to_string(first.path().join("meta.txt")).unwrap();
    // rebuild a config from the resolved echo
    let rebuilt: String = meta
        .lines()
        .filter_map(|l| l.strip_prefix("config."))
        .map(|l| format!("{l}\n"))
        .collect();
    let cfg_path = first.path().join("rebuilt.conf");
    fs::write(&cfg_path, rebuilt).unwrap();
    let second = tempfile::tempdir().unwrap();
    run_ok(&cfg_path, second.path());
    for mode in ["relaxed", "beta_resolved", "constant_sigma"] {
        let name = format!("harmonic_{mode}.csv");
        assert_eq!(
            read(&first.path().join(&name)),
            read(&second.path().join(&name)),
            "{name} not reproduced from resolved values"
        );
    }
}

#[test]
fn missing_config_exits_2() {
    let status = qsd()
        .args(["run", "--config", "/definitely/not/here.conf"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn malformed_config_exits_2_and_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.conf");
    fs::write(
        &cfg,
        "scenario = free\nmodes = closed_form\ntime.t_end = 1\nparams.mass = -1\n",
    )
    .unwrap();
    let output = qsd().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("params.mass"), "stderr: {stderr}");
}

#[test]
fn unknown_key_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.conf");
    fs::write(
        &cfg,
        "scenario = free\nmodes = closed_form\ntime.t_end = 1\nnot.a.key = 1\n",
    )
    .unwrap();
    let output = qsd().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("not.a.key"));
}

#[test]
fn solver_breakdown_exits_3() {
    // a double well deep enough that D_eff < 0: semiclassical validity error
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("well.conf");
    fs::write(
        &cfg,
        "scenario = pde\nmodes = coffey\nparams.hbar = 3.0\n\
         potential.kind = polynomial\npotential.coeffs = 0,0,-1,0,1\n\
         grid.x_lo = -3\ngrid.x_hi = 3\ntime.t_end = 0.01\ninitial.sigma2 = 0.25\n",
    )
    .unwrap();
    let output = qsd()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("semiclassical validity"));
}

#[test]
fn sweep_writes_summary_and_subdirectories() {
    let tmp = tempfile::tempdir().unwrap();
    let output = qsd()
        .args(["sweep", "--config"])
        .arg(repo_config("free.conf"))
        .args(["--key", "params.hbar", "--values", "0.01,0.1,1"])
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(output.status.success());
    let csv = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "value,final_sigma2,alpha_early,t_cross");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| {
            l.split(',')
                .map(|v| v.parse::<f64>().unwrap())
                .collect::<Vec<_>>()
        })
        .collect();
    assert_eq!(rows.len(), 3);
    // the final dispersion grows monotonically with hbar
    assert!(rows[0][1] < rows[1][1] && rows[1][1] < rows[2][1]);
    // t_cross scales as hbar²
    assert!((rows[2][3] / rows[1][3] - 100.0).abs() < 1e-9);
    for v in ["0.01", "0.1", "1"] {
        assert!(tmp
            .path()
            .join(format!("params.hbar={v}"))
            .join("free_closed_form.csv")
            .exists());
    }
}

#[test]
fn sweep_beta_matches_coth_equilibrium_per_row() {
    // long harmonic relaxation: the final beta_resolved dispersion lands on
    // the coth equilibrium at each swept temperature
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("harm.conf");
    fs::write(
        &cfg,
        "scenario = harmonic\nmodes = beta_resolved\nparams.hbar = 1.0\n\
         grid.n_beta = 128\ntime.t_end = 20\ntime.n_samples = 60\ninitial.sigma2 = 0.5\n",
    )
    .unwrap();
    let output = qsd()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--key", "params.beta", "--values", "0.5,1,2"])
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let csv = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    for (line, beta) in csv.lines().skip(1).zip([0.5f64, 1.0, 2.0]) {
        let fields: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let coth = |u: f64| 1.0 / u.tanh();
        let expect = 0.5 * coth(beta * 0.5);
        assert!(
            ((fields[1] - expect) / expect).abs() < 1e-3,
            "beta = {beta}: {} vs {expect}",
            fields[1]
        );
    }
}

#[test]
fn sweep_rejects_empty_values_and_bad_keys() {
    let status = qsd()
        .args(["sweep", "--config"])
        .arg(repo_config("free.conf"))
        .args(["--key", "params.hbar", "--values", ""])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let status = qsd()
        .args(["sweep", "--config"])
        .arg(repo_config("free.conf"))
        .args(["--key", "scenario", "--values", "1,2"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn scales_prints_derived_quantities() {
    let output = qsd()
        .args(["scales", "--config"])
        .arg(repo_config("harmonic.conf"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("lambda_t = 5.0000000000000000e-1"));
    assert!(stdout.contains("t_cross = 1.2500000000000000e-1"));
    assert!(stdout.contains("sigma2_eq_coth = 1.0819767068693265e0"));
}

#[test]
fn pde_meta_reports_conservation_and_stationary_variance() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(&repo_config("pde.conf"), tmp.path());
    let meta = fs::read_to_string(tmp.path().join("meta.txt")).unwrap();
    for form in ["coffey", "ankerhold"] {
        assert!(meta.contains(&format!("derived.sigma2_stationary_{form}")));
        assert!(meta.contains(&format!("run.{form}.max_norm_drift")));
        assert!(meta.contains(&format!("flag.{form}.validity_violated = false")));
    }
    let drift: f64 = meta
        .lines()
        .find(|l| l.starts_with("run.coffey.max_norm_drift"))
        .and_then(|l| l.split(" = ").nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!(drift <= 1e-10);
}
