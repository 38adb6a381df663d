//! Scenario dispatch: one config in, one CSV per requested mode plus a
//! meta.txt out.

use std::fs;
use std::path::{Path, PathBuf};

use qsd_core::analysis::crossover_scales;
use qsd_core::dispersion::{
    equilibrium_dispersion_harmonic, fit_log_law_const, log_law_free, relaxed_fixed_point,
    solve_beta_resolved, trajectory_closed_form, trajectory_constant_sigma,
    trajectory_early_power, trajectory_elementary, trajectory_relaxed, BetaInitialProfile,
    BetaResolvedOptions, DispersionMode, OdeOptions, ZetaModel,
};
use qsd_core::pde::{
    build_effective_fields, evolve, stationary_solution_oracle, EvolveOptions, GridSpec,
    GridState, PdeForm,
};

use crate::config::{
    parse_raw, resolve, InitialProfile, ModeSpec, Scenario, ScenarioConfig,
};
use crate::output::{fmt_float, write_meta, write_trajectory_csv};
use crate::CliError;

/// Fraction of t_cross below which a quench sample is taken from the
/// analytic seed law; mirrored in meta.txt.
const SEED_TIME_FRACTION: f64 = 1e-8;

/// One computed curve plus its file tag.
pub struct Curve {
    pub tag: &'static str,
    pub sigma2: Vec<f64>,
}

/// Everything a run produces before it is written to disk.
pub struct RunOutput {
    pub config: ScenarioConfig,
    pub t_grid: Vec<f64>,
    pub curves: Vec<Curve>,
    pub meta: Vec<(String, String)>,
}

/// Loads, validates and runs a config file, writing outputs under the
/// config's (or overridden) output directory.
pub fn run_path(config_path: &Path, out_override: Option<&Path>) -> Result<PathBuf, CliError> {
    let mut cfg = load_config(config_path)?;
    if let Some(dir) = out_override {
        cfg.output_dir = dir.to_path_buf();
    }
    let out = run_config(cfg)?;
    let dir = out.config.output_dir.clone();
    write_outputs(&out)?;
    Ok(dir)
}

pub fn load_config(config_path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(config_path).map_err(|e| {
        CliError::Config(format!("cannot read `{}`: {e}", config_path.display()))
    })?;
    resolve(parse_raw(&text)?)
}

/// Runs every requested mode on the shared time grid.
pub fn run_config(mut cfg: ScenarioConfig) -> Result<RunOutput, CliError> {
    let t_grid = cfg.time_grid();
    let p = cfg.params;
    let mut meta: Vec<(String, String)> = Vec::new();
    let fnum = |x: f64| fmt_float(x, 17);

    // resolve the log-law constant once so the echo is reproducible
    if cfg.log_law_const.is_none()
        && cfg
            .modes
            .iter()
            .any(|m| matches!(m, ModeSpec::Dispersion(DispersionMode::LogLaw)))
    {
        let tc = p.t_cross();
        let c = fit_log_law_const(&p, 10.0 * tc, 1000.0 * tc, 64)?;
        cfg.log_law_const = Some(c);
    }

    let mut curves = Vec::new();
    for spec in cfg.modes.clone() {
        match spec {
            ModeSpec::Dispersion(mode) => {
                let sigma2 = run_dispersion_mode(&cfg, mode, &t_grid, &mut meta)?;
                curves.push(Curve {
                    tag: mode.tag(),
                    sigma2,
                });
            }
            ModeSpec::Pde(form) => {
                let sigma2 = run_pde_form(&cfg, form, &t_grid, &mut meta)?;
                curves.push(Curve {
                    tag: form.tag(),
                    sigma2,
                });
            }
        }
    }

    // derived scales, after the solvers so mode-specific meta sits below
    let scales = crossover_scales(&p, cfg.arrhenius.as_ref());
    let mut derived = vec![
        ("derived.diffusion".to_string(), fnum(p.diffusion())),
        ("derived.lambda_t".to_string(), fnum(scales.lambda_t)),
        ("derived.t_cross".to_string(), fnum(scales.t_cross)),
        (
            "derived.sigma2_quantum_10pct".to_string(),
            fnum(scales.sigma2_quantum_10pct),
        ),
    ];
    if let Some(le) = scales.lambda_e {
        derived.push(("derived.lambda_e".to_string(), fnum(le)));
    }
    if cfg.scenario == Scenario::Harmonic {
        derived.push((
            "derived.sigma2_eq_relaxed".to_string(),
            fnum(relaxed_fixed_point(&p)?),
        ));
        derived.push((
            "derived.sigma2_eq_coth".to_string(),
            fnum(equilibrium_dispersion_harmonic(&p)?),
        ));
    }
    if let Some(c) = cfg.log_law_const {
        derived.push(("derived.log_law_const".to_string(), fnum(c)));
    }
    derived.extend(meta);
    meta = derived;

    Ok(RunOutput {
        config: cfg,
        t_grid,
        curves,
        meta,
    })
}

fn run_dispersion_mode(
    cfg: &ScenarioConfig,
    mode: DispersionMode,
    t_grid: &[f64],
    meta: &mut Vec<(String, String)>,
) -> Result<Vec<f64>, CliError> {
    let p = cfg.params;
    let ode = OdeOptions::default();
    let fnum = |x: f64| fmt_float(x, 17);
    let traj = match mode {
        DispersionMode::ClosedForm => trajectory_closed_form(&p, t_grid)?,
        DispersionMode::ElementaryApprox => trajectory_elementary(&p, t_grid)?,
        DispersionMode::LogLaw => {
            // late-time asymptote; sampled raw because it dips negative at
            // t well below t_cross, where it simply does not apply yet
            let c = cfg
                .log_law_const
                .expect("log-law constant resolved before dispatch");
            let sigma2 = t_grid
                .iter()
                .map(|&t| log_law_free(t, c, &p))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(sigma2);
        }
        DispersionMode::EarlyPower => {
            let zeta = match cfg.arrhenius {
                Some(model) => ZetaModel::Arrhenius(model),
                None => ZetaModel::Constant,
            };
            meta.push((
                "scheme.early_power_zeta".to_string(),
                match zeta {
                    ZetaModel::Constant => "constant".to_string(),
                    ZetaModel::Arrhenius(_) => "arrhenius".to_string(),
                },
            ));
            trajectory_early_power(&p, &zeta, t_grid)?
        }
        DispersionMode::Relaxed => trajectory_relaxed(&p, cfg.initial_sigma2, t_grid)?,
        DispersionMode::ConstantSigma => {
            let start = if cfg.initial_sigma2 > 0.0 {
                Some(cfg.initial_sigma2)
            } else {
                meta.push((
                    "scheme.seed_time_fraction".to_string(),
                    fnum(SEED_TIME_FRACTION),
                ));
                None
            };
            meta.push(("scheme.ode_rel_tol".to_string(), fnum(ode.rel_tol)));
            meta.push(("scheme.ode_abs_tol".to_string(), fnum(ode.abs_tol)));
            trajectory_constant_sigma(&p, start, t_grid, &ode)?
        }
        DispersionMode::BetaResolved => {
            let profile = match cfg.initial_profile {
                InitialProfile::Coth => BetaInitialProfile::CothEquilibrium,
                InitialProfile::Uniform => BetaInitialProfile::Uniform(cfg.initial_sigma2),
            };
            let opts = BetaResolvedOptions {
                n_beta: cfg.n_beta,
                beta_min: Some(cfg.beta_min),
                profile,
                ode,
                verify_quadrature: cfg.verify_quadrature,
            };
            let sol = solve_beta_resolved(&p, t_grid, &opts)?;
            meta.push(("scheme.n_beta".to_string(), cfg.n_beta.to_string()));
            meta.push(("scheme.beta_min".to_string(), fnum(cfg.beta_min)));
            if let Some(change) = sol.quadrature_rel_change {
                meta.push((
                    "derived.beta_quadrature_rel_change".to_string(),
                    fnum(change),
                ));
                meta.push((
                    "flag.beta_quadrature_warning".to_string(),
                    (change > 1e-4).to_string(),
                ));
            }
            sol.trajectory
        }
    };
    Ok(traj.sigma2().to_vec())
}

fn run_pde_form(
    cfg: &ScenarioConfig,
    form: PdeForm,
    t_grid: &[f64],
    meta: &mut Vec<(String, String)>,
) -> Result<Vec<f64>, CliError> {
    let p = cfg.params;
    let fnum = |x: f64| fmt_float(x, 17);
    let potential = cfg.build_potential()?;
    let spec = GridSpec::new(cfg.grid_x_lo, cfg.grid_x_hi, cfg.grid_n)?;
    let fields = build_effective_fields(&potential, &p, form, &spec)?;
    let opts = EvolveOptions::default();

    let tag = form.tag();
    meta.push((
        format!("flag.{tag}.validity_violated"),
        fields.validity_violated.to_string(),
    ));
    meta.push((
        format!("flag.{tag}.third_derivative_fd"),
        fields.third_derivative_fd.to_string(),
    ));
    if !fields.validity_violated {
        let oracle = stationary_solution_oracle(&fields, &p, &spec)?;
        meta.push((
            format!("derived.sigma2_stationary_{tag}"),
            fnum(oracle.moments().variance),
        ));
    }

    let mut state = GridState::gaussian(spec, cfg.initial_mean, cfg.initial_sigma2)?;
    let mut sigma2 = Vec::with_capacity(t_grid.len());
    let mut steps = 0u64;
    let mut min_density = state.min_density();
    let mut max_drift: f64 = 0.0;
    let mut clamped = false;
    for &t in t_grid {
        if t > state.time() {
            let out = evolve(state, &fields, &p, t, &opts)?;
            state = out.state;
            steps += out.steps;
            min_density = min_density.min(out.min_density);
            max_drift = max_drift.max(out.max_norm_drift);
            clamped |= out.d_eff_clamped;
        }
        sigma2.push(state.moments().variance);
    }

    meta.push((format!("run.{tag}.steps"), steps.to_string()));
    meta.push((format!("run.{tag}.min_density"), fnum(min_density)));
    meta.push((format!("run.{tag}.max_norm_drift"), fnum(max_drift)));
    meta.push((format!("flag.{tag}.d_eff_clamped"), clamped.to_string()));
    meta.push((
        "scheme.cfl_diffusion".to_string(),
        fnum(opts.cfl_diffusion),
    ));
    meta.push(("scheme.cfl_drift".to_string(), fnum(opts.cfl_drift)));
    Ok(sigma2)
}

/// Writes `<scenario>_<mode>.csv` per curve plus `meta.txt`.
pub fn write_outputs(out: &RunOutput) -> Result<(), CliError> {
    let dir = &out.config.output_dir;
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Solver(format!("cannot create `{}`: {e}", dir.display())))?;

    let prec = out.config.precision;
    for curve in &out.curves {
        let name = format!("{}_{}.csv", out.config.scenario.tag(), curve.tag);
        write_trajectory_csv(&dir.join(name), &out.t_grid, &curve.sigma2, prec)
            .map_err(|e| CliError::Solver(format!("write failed: {e}")))?;
    }

    let fnum = |x: f64| fmt_float(x, 17);
    let mut lines: Vec<(String, String)> = out
        .config
        .to_flat_lines(&fnum)
        .lines()
        .map(|l| {
            let (k, v) = l.split_once(" = ").expect("flat lines are key = value");
            (format!("config.{k}"), v.to_string())
        })
        .collect();
    // identical (key, value) pairs can be pushed once per mode; keep the first
    let mut seen = std::collections::HashSet::new();
    lines.extend(
        out.meta
            .iter()
            .filter(|kv| seen.insert((*kv).clone()))
            .cloned(),
    );
    write_meta(&dir.join("meta.txt"), &lines)
        .map_err(|e| CliError::Solver(format!("write failed: {e}")))?;
    Ok(())
}

/// `scales` subcommand: the derived quantities, one per line, on stdout.
pub fn scales_report(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let p = cfg.params;
    let fnum = |x: f64| fmt_float(x, 17);
    let s = crossover_scales(&p, cfg.arrhenius.as_ref());
    let mut out = String::new();
    out.push_str(&format!("diffusion = {}\n", fnum(p.diffusion())));
    out.push_str(&format!("lambda_t = {}\n", fnum(s.lambda_t)));
    out.push_str(&format!("t_cross = {}\n", fnum(s.t_cross)));
    out.push_str(&format!(
        "sigma2_quantum_10pct = {}\n",
        fnum(s.sigma2_quantum_10pct)
    ));
    if let Some(le) = s.lambda_e {
        out.push_str(&format!("lambda_e = {}\n", fnum(le)));
    }
    if cfg.scenario == Scenario::Harmonic {
        out.push_str(&format!(
            "sigma2_eq_relaxed = {}\n",
            fnum(relaxed_fixed_point(&p)?)
        ));
        out.push_str(&format!(
            "sigma2_eq_coth = {}\n",
            fnum(equilibrium_dispersion_harmonic(&p)?)
        ));
    }
    Ok(out)
}
