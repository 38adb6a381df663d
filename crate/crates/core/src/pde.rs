//! Conservative finite-difference solvers for the semiclassical
//! drift-diffusion (Smoluchowski) equations
//!
//! ∂_t P = ∂_x[P·∂_xV/ζ + ∂_x(D_eff P)]            (coffey form)
//! ∂_t P = ∂_x[P·∂_xV_eff/ζ + ∂_x(D_eff P)]        (ankerhold form)
//!
//! with D_eff = D(1 + β²ħ²V″/12m) and V_eff = V + βħ²V″/24m. The diffusion
//! term is discretized in the written operator ordering ∂_x(∂_x(D_eff P)) —
//! not the Fokker-Planck ∂_x(D_eff ∂_x P); the two differ whenever D_eff
//! varies in space. Fluxes live on cell interfaces with zero-flux (reflecting)
//! boundaries, so total mass is conserved by construction; the boundary nodes
//! own half cells, which makes the trapezoid norm the exact conserved mass.

use crate::error::{Error, Result};
use crate::model::{PhysicalParams, Potential};
use crate::scalar::{cst, two, Real};

/// Spatial grid: n ≥ 64 nodes spanning [x_lo, x_hi] inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<R: Real> {
    pub x_lo: R,
    pub x_hi: R,
    pub n: usize,
}

impl<R: Real> GridSpec<R> {
    pub fn new(x_lo: R, x_hi: R, n: usize) -> Result<Self> {
        if n < 64 {
            return Err(Error::InvalidParam {
                name: "grid.n",
                reason: format!("need at least 64 grid points, got {n}"),
            });
        }
        if !(x_hi > x_lo) || !x_lo.is_finite() || !x_hi.is_finite() {
            return Err(Error::InvalidParam {
                name: "grid",
                reason: format!("need finite x_lo < x_hi, got [{x_lo}, {x_hi}]"),
            });
        }
        Ok(Self { x_lo, x_hi, n })
    }

    pub fn dx(&self) -> R {
        (self.x_hi - self.x_lo) / R::from_usize(self.n - 1).unwrap()
    }

    pub fn node(&self, i: usize) -> R {
        self.x_lo + self.dx() * R::from_usize(i).unwrap()
    }

    pub fn nodes(&self) -> Vec<R> {
        (0..self.n).map(|i| self.node(i)).collect()
    }
}

/// Probability density on a grid at a point in time.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState<R: Real> {
    spec: GridSpec<R>,
    density: Vec<R>,
    time: R,
}

/// Trapezoid-rule moments of a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<R: Real> {
    pub norm: R,
    pub mean: R,
    pub variance: R,
}

impl<R: Real> GridState<R> {
    /// Wraps raw density values; tolerates undershoots down to −1e−12 and
    /// normalizes to unit mass.
    pub fn from_density(spec: GridSpec<R>, density: Vec<R>, time: R) -> Result<Self> {
        if density.len() != spec.n {
            return Err(Error::InvalidParam {
                name: "density",
                reason: format!("expected {} values, got {}", spec.n, density.len()),
            });
        }
        if density.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam {
                name: "density",
                reason: "density contains non-finite values".into(),
            });
        }
        let min = density.iter().copied().fold(R::infinity(), R::min);
        if min < cst(-1e-12) {
            return Err(Error::InvalidParam {
                name: "density",
                reason: format!("density undershoots below -1e-12: min = {min}"),
            });
        }
        let mut state = Self {
            spec,
            density,
            time,
        };
        state.normalize()?;
        Ok(state)
    }

    /// Normalized Gaussian of the given mean and variance.
    pub fn gaussian(spec: GridSpec<R>, mean: R, sigma2: R) -> Result<Self> {
        if !(sigma2 > R::zero()) {
            return Err(Error::InvalidParam {
                name: "initial.sigma2",
                reason: format!("must be > 0, got {sigma2}"),
            });
        }
        let norm = (two::<R>() * R::PI() * sigma2).sqrt().recip();
        let density = spec
            .nodes()
            .iter()
            .map(|&x| {
                let z = x - mean;
                norm * (-z * z / (two::<R>() * sigma2)).exp()
            })
            .collect();
        Self::from_density(spec, density, R::zero())
    }

    /// Rescales to unit trapezoid mass.
    pub fn normalize(&mut self) -> Result<()> {
        let norm = trapezoid(&self.density, self.spec.dx());
        if !(norm > R::zero()) || !norm.is_finite() {
            return Err(Error::Singular(format!(
                "cannot normalize density with mass {norm}"
            )));
        }
        for v in &mut self.density {
            *v /= norm;
        }
        Ok(())
    }

    pub fn spec(&self) -> &GridSpec<R> {
        &self.spec
    }

    pub fn density(&self) -> &[R] {
        &self.density
    }

    pub fn time(&self) -> R {
        self.time
    }

    pub fn min_density(&self) -> R {
        self.density.iter().copied().fold(R::infinity(), R::min)
    }

    /// Trapezoid norm, mean and variance.
    pub fn moments(&self) -> Moments<R> {
        let dx = self.spec.dx();
        let norm = trapezoid(&self.density, dx);
        let xs = self.spec.nodes();
        let weighted: Vec<R> = xs
            .iter()
            .zip(&self.density)
            .map(|(&x, &p)| x * p)
            .collect();
        let mean = trapezoid(&weighted, dx) / norm;
        let central: Vec<R> = xs
            .iter()
            .zip(&self.density)
            .map(|(&x, &p)| (x - mean) * (x - mean) * p)
            .collect();
        let variance = trapezoid(&central, dx) / norm;
        Moments {
            norm,
            mean,
            variance,
        }
    }
}

fn trapezoid<R: Real>(values: &[R], dx: R) -> R {
    let n = values.len();
    let half = cst::<R>(0.5);
    let mut acc = half * (values[0] + values[n - 1]);
    for &v in &values[1..n - 1] {
        acc += v;
    }
    acc * dx
}

/// Which semiclassical drift enters the flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PdeForm {
    /// Drift V′; quantum correction only through D_eff.
    Coffey,
    /// Drift V′ + βħ²V‴/24m from the effective potential.
    Ankerhold,
}

impl PdeForm {
    pub const ALL: [PdeForm; 2] = [PdeForm::Coffey, PdeForm::Ankerhold];

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Coffey => "coffey",
            Self::Ankerhold => "ankerhold",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.tag() == s)
    }
}

/// D_eff and the drift V′_eff sampled on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveFields<R: Real> {
    pub d_eff: Vec<R>,
    pub v_eff_prime: Vec<R>,
    pub form: PdeForm,
    /// Set when D_eff ≤ 0 somewhere: the semiclassical expansion broke down.
    pub validity_violated: bool,
    /// Set when V‴ had to come from an extra finite difference of a
    /// tabulated V″ (ankerhold form only).
    pub third_derivative_fd: bool,
}

/// Builds D_eff = D(1 + β²ħ²V″/12m) and the form's drift on the grid.
pub fn build_effective_fields<R: Real>(
    potential: &Potential<R>,
    p: &PhysicalParams<R>,
    form: PdeForm,
    spec: &GridSpec<R>,
) -> Result<EffectiveFields<R>> {
    let d = p.diffusion();
    let bh = p.beta * p.hbar;
    let quantum_diff = bh * bh / (cst::<R>(12.0) * p.mass);
    let quantum_drift = p.beta * p.hbar * p.hbar / (cst::<R>(24.0) * p.mass);

    let nodes = spec.nodes();
    let mut d_eff = Vec::with_capacity(spec.n);
    let mut v_eff_prime = Vec::with_capacity(spec.n);
    for &x in &nodes {
        let v2 = potential.second_derivative(x)?;
        d_eff.push(d * (R::one() + quantum_diff * v2));
        let mut drift = potential.first_derivative(x)?;
        if form == PdeForm::Ankerhold {
            drift += quantum_drift * potential.third_derivative(x)?;
        }
        v_eff_prime.push(drift);
    }
    let validity_violated = d_eff.iter().any(|&v| !(v > R::zero()));
    Ok(EffectiveFields {
        d_eff,
        v_eff_prime,
        form,
        validity_violated,
        third_derivative_fd: form == PdeForm::Ankerhold && !potential.has_exact_derivatives(),
    })
}

/// Explicit-stepping controls.
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions<R: Real> {
    /// Diffusive CFL safety factor: dt ≤ cfl_diffusion·dx²/max(D_eff).
    pub cfl_diffusion: R,
    /// Drift CFL safety factor: dt ≤ cfl_drift·dx·ζ/max|V′_eff|.
    pub cfl_drift: R,
    /// Evolve despite D_eff ≤ 0 by clamping it to 1e−3·D (reported).
    pub allow_invalid_fields: bool,
}

impl<R: Real> Default for EvolveOptions<R> {
    fn default() -> Self {
        Self {
            cfl_diffusion: cst(0.4),
            cfl_drift: cst(0.4),
            allow_invalid_fields: false,
        }
    }
}

/// Evolution outcome with the run diagnostics the acceptance checks need.
#[derive(Debug, Clone)]
pub struct EvolveOutcome<R: Real> {
    pub state: GridState<R>,
    pub steps: u64,
    /// Smallest density value seen at any step.
    pub min_density: R,
    /// Largest |trapezoid norm − 1| seen at any step.
    pub max_norm_drift: R,
    /// True when D_eff had to be clamped to stay positive.
    pub d_eff_clamped: bool,
}

/// Advances the state to t_end with forward Euler on the conservative flux
/// form; reflecting boundaries conserve mass to round-off.
pub fn evolve<R: Real>(
    state: GridState<R>,
    fields: &EffectiveFields<R>,
    p: &PhysicalParams<R>,
    t_end: R,
    opts: &EvolveOptions<R>,
) -> Result<EvolveOutcome<R>> {
    let spec = *state.spec();
    if fields.d_eff.len() != spec.n || fields.v_eff_prime.len() != spec.n {
        return Err(Error::InvalidParam {
            name: "fields",
            reason: "field arrays do not match the grid".into(),
        });
    }
    if t_end < state.time() {
        return Err(Error::InvalidParam {
            name: "t_end",
            reason: format!("t_end = {t_end} is before the state time {}", state.time()),
        });
    }

    let mut d_eff = fields.d_eff.clone();
    let mut clamped = false;
    if fields.validity_violated {
        if !opts.allow_invalid_fields {
            return Err(Error::Validity(
                "D_eff <= 0 on the grid; set the override to clamp and explore anyway".into(),
            ));
        }
        let floor = cst::<R>(1e-3) * p.diffusion();
        for v in &mut d_eff {
            if *v < floor {
                *v = floor;
                clamped = true;
            }
        }
    }

    let dx = spec.dx();
    let max_d = d_eff.iter().copied().fold(R::zero(), R::max);
    let max_v = fields
        .v_eff_prime
        .iter()
        .map(|v| v.abs())
        .fold(R::zero(), R::max);
    let mut dt_cap = opts.cfl_diffusion * dx * dx / max_d;
    if max_v > R::zero() {
        dt_cap = dt_cap.min(opts.cfl_drift * dx * p.friction / max_v);
    }

    let inv_zeta = p.friction.recip();
    let half = cst::<R>(0.5);
    let n = spec.n;
    let mut density = state.density().to_vec();
    let mut time = state.time();
    let mut flux = vec![R::zero(); n - 1];
    let mut steps = 0u64;
    let mut min_density = state.min_density();
    let mut max_norm_drift = (trapezoid(&density, dx) - R::one()).abs();

    while time < t_end {
        let dt = dt_cap.min(t_end - time);
        for i in 0..n - 1 {
            let drift = half * (density[i] * fields.v_eff_prime[i]
                + density[i + 1] * fields.v_eff_prime[i + 1])
                * inv_zeta;
            let diffusion = (d_eff[i + 1] * density[i + 1] - d_eff[i] * density[i]) / dx;
            flux[i] = drift + diffusion;
        }
        // interior: centered divergence; boundary nodes own half cells
        let dt_dx = dt / dx;
        density[0] += two::<R>() * dt_dx * flux[0];
        for i in 1..n - 1 {
            density[i] += dt_dx * (flux[i] - flux[i - 1]);
        }
        density[n - 1] -= two::<R>() * dt_dx * flux[n - 2];
        time += dt;
        steps += 1;

        let min = density.iter().copied().fold(R::infinity(), R::min);
        min_density = min_density.min(min);
        if min < cst(-1e-8) {
            return Err(Error::StepFailure(format!(
                "density went below -1e-8 (min = {min}) at t = {time}"
            )));
        }
        let drift = (trapezoid(&density, dx) - R::one()).abs();
        max_norm_drift = max_norm_drift.max(drift);
    }

    Ok(EvolveOutcome {
        state: GridState {
            spec,
            density,
            time,
        },
        steps,
        min_density,
        max_norm_drift,
        d_eff_clamped: clamped,
    })
}

/// Zero-flux steady state P_s ∝ (1/D_eff)·exp(−∫ V′_eff/(ζ·D_eff) dx) by
/// cumulative trapezoid quadrature, normalized on the grid.
pub fn stationary_solution_oracle<R: Real>(
    fields: &EffectiveFields<R>,
    p: &PhysicalParams<R>,
    spec: &GridSpec<R>,
) -> Result<GridState<R>> {
    if fields.d_eff.len() != spec.n {
        return Err(Error::InvalidParam {
            name: "fields",
            reason: "field arrays do not match the grid".into(),
        });
    }
    if fields.validity_violated {
        return Err(Error::Validity(
            "stationary state undefined where D_eff <= 0".into(),
        ));
    }
    let dx = spec.dx();
    let half = cst::<R>(0.5);
    let inv_zeta = p.friction.recip();
    let g: Vec<R> = fields
        .v_eff_prime
        .iter()
        .zip(&fields.d_eff)
        .map(|(&v, &d)| v * inv_zeta / d)
        .collect();

    // log-space accumulation keeps steep potentials from underflowing
    let mut log_p = Vec::with_capacity(spec.n);
    let mut acc = R::zero();
    log_p.push(-fields.d_eff[0].ln());
    for i in 1..spec.n {
        acc += half * (g[i - 1] + g[i]) * dx;
        log_p.push(-acc - fields.d_eff[i].ln());
    }
    let peak = log_p.iter().copied().fold(R::neg_infinity(), R::max);
    let density = log_p.iter().map(|&lp| (lp - peak).exp()).collect();
    GridState::from_density(*spec, density, R::zero())
}
