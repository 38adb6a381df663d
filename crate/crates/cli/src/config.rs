//! Scenario configuration: a flat `key = value` document with dot-path keys
//! and `#` comments, chosen over a nested format so golden files diff
//! trivially.
//!
//! Unknown keys are hard errors, and every numeric field is validated with
//! the offending key named in the message.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use qsd_core::dispersion::DispersionMode;
use qsd_core::model::{ArrheniusModel, PhysicalParams, Potential};
use qsd_core::pde::PdeForm;

use crate::CliError;

/// All keys the config format accepts, in canonical (echo) order.
pub const KNOWN_KEYS: &[&str] = &[
    "scenario",
    "modes",
    "params.mass",
    "params.friction",
    "params.beta",
    "params.hbar",
    "params.omega0",
    "arrhenius.d0",
    "arrhenius.ea",
    "potential.kind",
    "potential.coeffs",
    "potential.samples",
    "potential.x_lo",
    "potential.x_hi",
    "grid.n",
    "grid.x_lo",
    "grid.x_hi",
    "grid.n_beta",
    "grid.beta_min",
    "grid.verify_quadrature",
    "time.t_start",
    "time.t_end",
    "time.n_samples",
    "time.spacing",
    "initial.sigma2",
    "initial.mean",
    "initial.profile",
    "log_law.const",
    "output.dir",
    "output.precision",
];

/// Keys that hold a single number and can therefore be swept.
pub const NUMERIC_KEYS: &[&str] = &[
    "params.mass",
    "params.friction",
    "params.beta",
    "params.hbar",
    "params.omega0",
    "arrhenius.d0",
    "arrhenius.ea",
    "potential.x_lo",
    "potential.x_hi",
    "grid.n",
    "grid.x_lo",
    "grid.x_hi",
    "grid.n_beta",
    "grid.beta_min",
    "time.t_start",
    "time.t_end",
    "time.n_samples",
    "initial.sigma2",
    "initial.mean",
    "log_law.const",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Free,
    Harmonic,
    Pde,
}

impl Scenario {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Free => "free",
            Self::Harmonic => "harmonic",
            Self::Pde => "pde",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "free" => Some(Self::Free),
            "harmonic" => Some(Self::Harmonic),
            "pde" => Some(Self::Pde),
            _ => None,
        }
    }
}

/// A requested output curve: a dispersion law or a PDE drift form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSpec {
    Dispersion(DispersionMode),
    Pde(PdeForm),
}

impl ModeSpec {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Dispersion(m) => m.tag(),
            Self::Pde(f) => f.tag(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Geometric,
}

impl Spacing {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Geometric => "geometric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialProfile {
    Uniform,
    Coth,
}

impl InitialProfile {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::Coth => "coth",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialConfig {
    Polynomial { coeffs: Vec<f64> },
    Tabulated { samples: Vec<f64> },
}

/// Fully resolved scenario configuration; every default filled in.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub modes: Vec<ModeSpec>,
    pub params: PhysicalParams<f64>,
    pub arrhenius: Option<ArrheniusModel<f64>>,
    pub potential: Option<PotentialConfig>,
    pub potential_x_lo: f64,
    pub potential_x_hi: f64,
    pub grid_n: usize,
    pub grid_x_lo: f64,
    pub grid_x_hi: f64,
    pub n_beta: usize,
    pub beta_min: f64,
    pub verify_quadrature: bool,
    pub t_start: f64,
    pub t_end: f64,
    pub n_samples: usize,
    pub spacing: Spacing,
    /// σ²(0); 0 requests a quench from the origin.
    pub initial_sigma2: f64,
    pub initial_mean: f64,
    pub initial_profile: InitialProfile,
    /// Resolved log-law constant (fitted when the config omits it).
    pub log_law_const: Option<f64>,
    pub output_dir: PathBuf,
    pub precision: usize,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Re-keys a core validation error under this config section, so messages
/// name the full dotted path (e.g. `params.mass`).
fn section_err(section: &str, e: qsd_core::Error) -> CliError {
    match e {
        qsd_core::Error::InvalidParam { name, reason } => {
            config_err(format!("`{section}.{name}`: {reason}"))
        }
        other => config_err(other.to_string()),
    }
}

/// Parses the raw document into an ordered key → value map; rejects unknown
/// and duplicate keys.
pub fn parse_raw(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(config_err(format!(
                "line {}: expected `key = value`, got `{line}`",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(config_err(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(config_err(format!(
                "line {}: duplicate key `{key}`",
                lineno + 1
            )));
        }
    }
    Ok(map)
}

struct Extractor {
    map: BTreeMap<String, String>,
}

impl Extractor {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| config_err(format!("`{key}`: not a number: `{v}`"))),
        }
    }

    fn f64_opt(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| config_err(format!("`{key}`: not a number: `{v}`"))),
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => {
                // accept sweep-style float spellings of integers
                let as_f64 = v
                    .parse::<f64>()
                    .map_err(|_| config_err(format!("`{key}`: not a number: `{v}`")))?;
                if as_f64 < 0.0 || as_f64.fract() != 0.0 || as_f64 > 1e9 {
                    return Err(config_err(format!(
                        "`{key}`: expected a non-negative integer, got `{v}`"
                    )));
                }
                Ok(as_f64 as usize)
            }
        }
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.take(key).as_deref() {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(config_err(format!("`{key}`: expected true/false, got `{v}`"))),
        }
    }

    fn float_list(&mut self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|piece| {
                    piece
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| config_err(format!("`{key}`: not a number: `{piece}`")))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }
}

/// Validates and resolves a raw map into a full [`ScenarioConfig`].
pub fn resolve(map: BTreeMap<String, String>) -> Result<ScenarioConfig, CliError> {
    let mut ex = Extractor { map };

    let scenario = match ex.take("scenario") {
        None => return Err(config_err("missing required key `scenario`")),
        Some(v) => Scenario::parse(&v)
            .ok_or_else(|| config_err(format!("`scenario`: expected free|harmonic|pde, got `{v}`")))?,
    };

    let modes_raw = ex
        .take("modes")
        .ok_or_else(|| config_err("missing required key `modes`"))?;
    let mut modes = Vec::new();
    for piece in modes_raw.split(',') {
        let tag = piece.trim();
        if tag.is_empty() {
            continue;
        }
        let spec = DispersionMode::parse(tag)
            .map(ModeSpec::Dispersion)
            .or_else(|| PdeForm::parse(tag).map(ModeSpec::Pde))
            .ok_or_else(|| config_err(format!("`modes`: unknown mode `{tag}`")))?;
        if modes.contains(&spec) {
            return Err(config_err(format!("`modes`: duplicate mode `{tag}`")));
        }
        modes.push(spec);
    }
    if modes.is_empty() {
        return Err(config_err("`modes`: at least one mode is required"));
    }

    let mass = ex.f64_or("params.mass", 1.0)?;
    let friction = ex.f64_or("params.friction", 1.0)?;
    let beta = ex.f64_or("params.beta", 1.0)?;
    let hbar = ex.f64_or("params.hbar", 1.0)?;
    let default_omega0 = match scenario {
        Scenario::Harmonic => 1.0,
        _ => 0.0,
    };
    let omega0 = ex.f64_or("params.omega0", default_omega0)?;
    let params = PhysicalParams::new(mass, friction, beta, hbar, omega0)
        .map_err(|e| section_err("params", e))?;

    match scenario {
        Scenario::Free if omega0 != 0.0 => {
            return Err(config_err(
                "`params.omega0`: must be 0 for the free scenario",
            ));
        }
        Scenario::Harmonic if omega0 <= 0.0 => {
            return Err(config_err(
                "`params.omega0`: must be > 0 for the harmonic scenario",
            ));
        }
        _ => {}
    }

    let d0 = ex.f64_opt("arrhenius.d0")?;
    let ea = ex.f64_opt("arrhenius.ea")?;
    let arrhenius = match (d0, ea) {
        (None, None) => None,
        (Some(d0), Some(ea)) => {
            Some(ArrheniusModel::new(d0, ea).map_err(|e| section_err("arrhenius", e))?)
        }
        _ => {
            return Err(config_err(
                "`arrhenius.d0` and `arrhenius.ea` must be given together",
            ));
        }
    };

    let grid_n = ex.usize_or("grid.n", 1024)?;
    let grid_x_lo = ex.f64_or("grid.x_lo", -8.0)?;
    let grid_x_hi = ex.f64_or("grid.x_hi", 8.0)?;
    let n_beta = ex.usize_or("grid.n_beta", 64)?;
    if n_beta < 16 {
        return Err(config_err(format!(
            "`grid.n_beta`: need at least 16, got {n_beta}"
        )));
    }
    let beta_min = match ex.f64_opt("grid.beta_min")? {
        Some(v) => {
            if !(v > 0.0) || v > beta / n_beta as f64 {
                return Err(config_err(format!(
                    "`grid.beta_min`: must lie in (0, beta/n_beta], got {v}"
                )));
            }
            v
        }
        None => beta / (4.0 * n_beta as f64),
    };
    let verify_quadrature = ex.bool_or("grid.verify_quadrature", true)?;

    let potential_kind = ex.take("potential.kind");
    let coeffs = ex.float_list("potential.coeffs")?;
    let samples = ex.float_list("potential.samples")?;
    let potential_x_lo = ex.f64_or("potential.x_lo", grid_x_lo)?;
    let potential_x_hi = ex.f64_or("potential.x_hi", grid_x_hi)?;
    let potential = match scenario {
        Scenario::Pde => {
            let kind = potential_kind
                .ok_or_else(|| config_err("`potential.kind`: required for the pde scenario"))?;
            match kind.as_str() {
                "polynomial" => {
                    let coeffs = coeffs.ok_or_else(|| {
                        config_err("`potential.coeffs`: required for a polynomial potential")
                    })?;
                    if samples.is_some() {
                        return Err(config_err(
                            "`potential.samples`: not allowed with kind = polynomial",
                        ));
                    }
                    Some(PotentialConfig::Polynomial { coeffs })
                }
                "tabulated" => {
                    let samples = samples.ok_or_else(|| {
                        config_err("`potential.samples`: required for a tabulated potential")
                    })?;
                    if coeffs.is_some() {
                        return Err(config_err(
                            "`potential.coeffs`: not allowed with kind = tabulated",
                        ));
                    }
                    Some(PotentialConfig::Tabulated { samples })
                }
                other => {
                    return Err(config_err(format!(
                        "`potential.kind`: expected polynomial|tabulated, got `{other}`"
                    )));
                }
            }
        }
        _ => {
            if potential_kind.is_some() || coeffs.is_some() || samples.is_some() {
                return Err(config_err(
                    "`potential.*`: only meaningful for the pde scenario",
                ));
            }
            None
        }
    };
    if potential.is_some() && (potential_x_lo > grid_x_lo || potential_x_hi < grid_x_hi) {
        return Err(config_err(
            "`potential.x_lo`/`potential.x_hi`: the potential domain must cover the grid",
        ));
    }

    let t_start = ex.f64_or("time.t_start", 0.0)?;
    let t_end = match ex.f64_opt("time.t_end")? {
        Some(v) => v,
        None => return Err(config_err("missing required key `time.t_end`")),
    };
    let n_samples = ex.usize_or("time.n_samples", 200)?;
    if n_samples < 2 {
        return Err(config_err(format!(
            "`time.n_samples`: need at least 2, got {n_samples}"
        )));
    }
    let spacing = match ex.take("time.spacing").as_deref() {
        None | Some("linear") => Spacing::Linear,
        Some("geometric") => Spacing::Geometric,
        Some(v) => {
            return Err(config_err(format!(
                "`time.spacing`: expected linear|geometric, got `{v}`"
            )));
        }
    };
    if spacing == Spacing::Geometric && !(t_start > 0.0) {
        return Err(config_err(
            "`time.t_start`: geometric spacing requires t_start > 0",
        ));
    }
    if !(t_start >= 0.0) {
        return Err(config_err(format!(
            "`time.t_start`: must be >= 0, got {t_start}"
        )));
    }
    if !(t_end > t_start) {
        return Err(config_err(format!(
            "`time.t_end`: must exceed t_start = {t_start}, got {t_end}"
        )));
    }

    let initial_sigma2 = ex.f64_or("initial.sigma2", 0.0)?;
    if initial_sigma2 < 0.0 {
        return Err(config_err(format!(
            "`initial.sigma2`: must be >= 0 (0 selects a quench), got {initial_sigma2}"
        )));
    }
    let initial_mean = ex.f64_or("initial.mean", 0.0)?;
    let initial_profile = match ex.take("initial.profile").as_deref() {
        None | Some("uniform") => InitialProfile::Uniform,
        Some("coth") => InitialProfile::Coth,
        Some(v) => {
            return Err(config_err(format!(
                "`initial.profile`: expected uniform|coth, got `{v}`"
            )));
        }
    };
    let log_law_const = ex.f64_opt("log_law.const")?;

    let output_dir = PathBuf::from(ex.take("output.dir").unwrap_or_else(|| "out".into()));
    let precision = ex.usize_or("output.precision", 17)?;
    if !(3..=17).contains(&precision) {
        return Err(config_err(format!(
            "`output.precision`: expected 3..=17 significant digits, got {precision}"
        )));
    }

    // per-scenario mode admissibility
    for spec in &modes {
        let ok = match (scenario, spec) {
            (Scenario::Pde, ModeSpec::Pde(_)) => true,
            (Scenario::Pde, _) => false,
            (_, ModeSpec::Pde(_)) => false,
            (Scenario::Free, ModeSpec::Dispersion(m)) => !matches!(
                m,
                DispersionMode::Relaxed
            ),
            (Scenario::Harmonic, ModeSpec::Dispersion(m)) => matches!(
                m,
                DispersionMode::Relaxed
                    | DispersionMode::BetaResolved
                    | DispersionMode::ConstantSigma
            ),
        };
        if !ok {
            return Err(config_err(format!(
                "`modes`: mode `{}` is not valid for scenario `{}`",
                spec.tag(),
                scenario.tag()
            )));
        }
    }

    for spec in &modes {
        let ModeSpec::Dispersion(m) = spec else { continue };
        match m {
            DispersionMode::ClosedForm if hbar == 0.0 => {
                return Err(config_err(
                    "`params.hbar`: closed_form requires hbar > 0",
                ));
            }
            DispersionMode::LogLaw => {
                if t_start <= 0.0 {
                    return Err(config_err(
                        "`time.t_start`: log_law needs strictly positive sample times",
                    ));
                }
                if hbar == 0.0 && log_law_const.is_none() {
                    return Err(config_err(
                        "`log_law.const`: required when hbar = 0 (nothing to fit against)",
                    ));
                }
            }
            DispersionMode::EarlyPower if hbar == 0.0 => {
                return Err(config_err(
                    "`params.hbar`: early_power requires hbar > 0",
                ));
            }
            DispersionMode::BetaResolved => {
                let coth = initial_profile == InitialProfile::Coth;
                if coth && scenario != Scenario::Harmonic {
                    return Err(config_err(
                        "`initial.profile`: coth needs the harmonic scenario",
                    ));
                }
                if !coth && !(initial_sigma2 > 0.0) {
                    return Err(config_err(
                        "`initial.sigma2`: beta_resolved needs a positive start (or profile = coth)",
                    ));
                }
            }
            _ => {}
        }
    }
    if scenario == Scenario::Pde && !(initial_sigma2 > 0.0) {
        return Err(config_err(
            "`initial.sigma2`: the pde scenario starts from a Gaussian and needs sigma2 > 0",
        ));
    }

    Ok(ScenarioConfig {
        scenario,
        modes,
        params,
        arrhenius,
        potential,
        potential_x_lo,
        potential_x_hi,
        grid_n,
        grid_x_lo,
        grid_x_hi,
        n_beta,
        beta_min,
        verify_quadrature,
        t_start,
        t_end,
        n_samples,
        spacing,
        initial_sigma2,
        initial_mean,
        initial_profile,
        log_law_const,
        output_dir,
        precision,
    })
}

impl ScenarioConfig {
    /// Builds the sample-time grid.
    pub fn time_grid(&self) -> Vec<f64> {
        let n = self.n_samples;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.t_start + (self.t_end - self.t_start) * f,
                    Spacing::Geometric => {
                        self.t_start * (self.t_end / self.t_start).powf(f)
                    }
                }
            })
            .collect()
    }

    /// Instantiates the configured potential for the pde scenario.
    pub fn build_potential(&self) -> Result<Potential<f64>, CliError> {
        let cfg = self
            .potential
            .as_ref()
            .ok_or_else(|| config_err("internal: potential requested without config"))?;
        let result = match cfg {
            PotentialConfig::Polynomial { coeffs } => Potential::polynomial(
                coeffs.clone(),
                self.potential_x_lo,
                self.potential_x_hi,
            ),
            PotentialConfig::Tabulated { samples } => Potential::tabulated(
                self.potential_x_lo,
                self.potential_x_hi,
                samples.clone(),
            ),
        };
        result.map_err(|e| config_err(format!("potential: {e}")))
    }

    /// Echoes every resolved key in canonical order; parsing these lines
    /// back reproduces this configuration bit for bit.
    pub fn to_flat_lines(&self, fmt: &impl Fn(f64) -> String) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("scenario", self.scenario.tag().into());
        kv(
            "modes",
            self.modes
                .iter()
                .map(ModeSpec::tag)
                .collect::<Vec<_>>()
                .join(","),
        );
        kv("params.mass", fmt(self.params.mass));
        kv("params.friction", fmt(self.params.friction));
        kv("params.beta", fmt(self.params.beta));
        kv("params.hbar", fmt(self.params.hbar));
        kv("params.omega0", fmt(self.params.omega0));
        if let Some(a) = &self.arrhenius {
            kv("arrhenius.d0", fmt(a.d0));
            kv("arrhenius.ea", fmt(a.ea));
        }
        match &self.potential {
            Some(PotentialConfig::Polynomial { coeffs }) => {
                kv("potential.kind", "polynomial".into());
                kv(
                    "potential.coeffs",
                    coeffs.iter().map(|&c| fmt(c)).collect::<Vec<_>>().join(","),
                );
                kv("potential.x_lo", fmt(self.potential_x_lo));
                kv("potential.x_hi", fmt(self.potential_x_hi));
            }
            Some(PotentialConfig::Tabulated { samples }) => {
                kv("potential.kind", "tabulated".into());
                kv(
                    "potential.samples",
                    samples.iter().map(|&c| fmt(c)).collect::<Vec<_>>().join(","),
                );
                kv("potential.x_lo", fmt(self.potential_x_lo));
                kv("potential.x_hi", fmt(self.potential_x_hi));
            }
            None => {}
        }
        kv("grid.n", self.grid_n.to_string());
        kv("grid.x_lo", fmt(self.grid_x_lo));
        kv("grid.x_hi", fmt(self.grid_x_hi));
        kv("grid.n_beta", self.n_beta.to_string());
        kv("grid.beta_min", fmt(self.beta_min));
        kv("grid.verify_quadrature", self.verify_quadrature.to_string());
        kv("time.t_start", fmt(self.t_start));
        kv("time.t_end", fmt(self.t_end));
        kv("time.n_samples", self.n_samples.to_string());
        kv("time.spacing", self.spacing.tag().into());
        kv("initial.sigma2", fmt(self.initial_sigma2));
        kv("initial.mean", fmt(self.initial_mean));
        kv("initial.profile", self.initial_profile.tag().into());
        if let Some(c) = self.log_law_const {
            kv("log_law.const", fmt(c));
        }
        kv("output.dir", self.output_dir.display().to_string());
        kv("output.precision", self.precision.to_string());
        s
    }
}
