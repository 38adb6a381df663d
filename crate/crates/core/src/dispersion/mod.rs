//! Gaussian-ansatz dispersion dynamics of a quantum Brownian particle.
//!
//! For a harmonic (or free, ω₀ = 0) particle the position distribution stays
//! Gaussian and its dispersion σ²(t) obeys a one-parameter family of
//! equations, ordered here from most to least faithful:
//!
//! * β-resolved integro-ODE family: ∂_t σ²(β′) = 2D(β′)(1 + σ²·I − β′mω₀²σ²)
//!   with I = ∫₀^{β′} ħ²/(4mσ⁴(b)) db ([`solve_beta_resolved`]),
//! * constant-σ⁴ reduction of the integral: ∂_t σ² = 2D(1 + λ_T²/σ² − βmω₀²σ²)
//!   ([`rhs_constant_sigma`]), whose free-particle solution is the exact
//!   closed form σ² = λ_T²{−1 − W₋₁[−exp(−1 − 2Dt/λ_T²)]}
//!   ([`solve_free_closed_form`]),
//! * relaxed-fluctuation linearization: ∂_t σ² = 2D(1 + β²ħ²ω₀²/12 − βmω₀²σ²)
//!   ([`rhs_relaxed_harmonic`]), solvable in closed form,
//! * asymptotic laws: the early-time power law σ⁴ = ħ²t/(m∂_β(βζ)), the
//!   late-time log law 2Dt + λ_T²ln t + const, and the elementary
//!   approximation 2Dt + 2λ_T²ln(1 + √(Dt)/λ_T).

mod beta;
mod ode;

pub use beta::{
    beta_family_rhs, solve_beta_resolved, uniform_beta_grid, BetaFamilyState, BetaInitialProfile,
    BetaResolvedOptions, BetaResolvedSolution,
};
pub use ode::{integrate_dispersion_ode, OdeOptions};

use crate::error::{Error, Result};
use crate::model::{arrhenius_diffusion, ArrheniusModel, PhysicalParams};
use crate::scalar::{cst, two, Real};
use crate::specfun::{coth_stable, lambert_wm1_neg_exp};

/// Fraction of t_cross at which a quench from σ² = 0 is replaced by its
/// analytic early-time seed before numeric integration.
const SEED_TIME_FRACTION: f64 = 1e-8;

/// The dispersion laws this module can produce, tagged for output files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DispersionMode {
    BetaResolved,
    ConstantSigma,
    Relaxed,
    ClosedForm,
    LogLaw,
    EarlyPower,
    ElementaryApprox,
}

impl DispersionMode {
    pub const ALL: [DispersionMode; 7] = [
        DispersionMode::BetaResolved,
        DispersionMode::ConstantSigma,
        DispersionMode::Relaxed,
        DispersionMode::ClosedForm,
        DispersionMode::LogLaw,
        DispersionMode::EarlyPower,
        DispersionMode::ElementaryApprox,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Self::BetaResolved => "beta_resolved",
            Self::ConstantSigma => "constant_sigma",
            Self::Relaxed => "relaxed",
            Self::ClosedForm => "closed_form",
            Self::LogLaw => "log_law",
            Self::EarlyPower => "early_power",
            Self::ElementaryApprox => "elementary_approx",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.tag() == s)
    }
}

/// A sampled (t, σ²) curve with the mode and parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionTrajectory<R: Real> {
    times: Vec<R>,
    sigma2: Vec<R>,
    mode: DispersionMode,
    params: PhysicalParams<R>,
}

impl<R: Real> DispersionTrajectory<R> {
    /// Validates: equal lengths, strictly increasing times, positive σ²
    /// (the first sample may be 0 for laws that pass through the origin).
    pub fn new(
        times: Vec<R>,
        sigma2: Vec<R>,
        mode: DispersionMode,
        params: PhysicalParams<R>,
    ) -> Result<Self> {
        if times.len() != sigma2.len() {
            return Err(Error::InvalidParam {
                name: "trajectory",
                reason: format!(
                    "times and sigma2 lengths differ: {} vs {}",
                    times.len(),
                    sigma2.len()
                ),
            });
        }
        if times.is_empty() {
            return Err(Error::InvalidParam {
                name: "trajectory",
                reason: "empty trajectory".into(),
            });
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParam {
                    name: "trajectory",
                    reason: format!("times not strictly increasing at {} -> {}", w[0], w[1]),
                });
            }
        }
        for (i, &s) in sigma2.iter().enumerate() {
            let ok = if i == 0 { s >= R::zero() } else { s > R::zero() };
            if !ok || !s.is_finite() {
                return Err(Error::InvalidParam {
                    name: "trajectory",
                    reason: format!("sigma2[{i}] = {s} violates positivity"),
                });
            }
        }
        Ok(Self {
            times,
            sigma2,
            mode,
            params,
        })
    }

    pub fn times(&self) -> &[R] {
        &self.times
    }

    pub fn sigma2(&self) -> &[R] {
        &self.sigma2
    }

    pub fn mode(&self) -> DispersionMode {
        self.mode
    }

    pub fn params(&self) -> &PhysicalParams<R> {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (R, R)> + '_ {
        self.times
            .iter()
            .copied()
            .zip(self.sigma2.iter().copied())
    }
}

/// Equilibrium dispersion of the harmonic oscillator,
/// σ_e² = (ħ/2mω₀)·coth(βħω₀/2); the classical k_BT/(mω₀²) when ħ = 0.
pub fn equilibrium_dispersion_harmonic<R: Real>(p: &PhysicalParams<R>) -> Result<R> {
    if p.is_free() {
        return Err(Error::Degenerate(
            "free particle has no equilibrium dispersion".into(),
        ));
    }
    if p.is_classical() {
        return Ok((p.beta * p.mass * p.omega0 * p.omega0).recip());
    }
    let u = p.beta * p.hbar * p.omega0 / two();
    Ok(p.hbar / (two::<R>() * p.mass * p.omega0) * coth_stable(u)?)
}

/// Relaxed-fluctuation growth rate 2D(1 + β²ħ²ω₀²/12 − βmω₀²σ²).
pub fn rhs_relaxed_harmonic<R: Real>(sigma2: R, p: &PhysicalParams<R>) -> R {
    let bho = p.beta * p.hbar * p.omega0;
    two::<R>()
        * p.diffusion()
        * (R::one() + bho * bho / cst(12.0) - p.beta * p.mass * p.omega0 * p.omega0 * sigma2)
}

/// Fixed point (1 + β²ħ²ω₀²/12)/(βmω₀²) of the relaxed harmonic equation.
pub fn relaxed_fixed_point<R: Real>(p: &PhysicalParams<R>) -> Result<R> {
    if p.is_free() {
        return Err(Error::Degenerate(
            "relaxed fixed point needs omega0 > 0".into(),
        ));
    }
    let bho = p.beta * p.hbar * p.omega0;
    Ok((R::one() + bho * bho / cst(12.0)) / (p.beta * p.mass * p.omega0 * p.omega0))
}

/// Exact solution of the relaxed harmonic equation from σ²(0) = sigma2_0:
/// σ∞² + (σ₀² − σ∞²)·exp(−2Dβmω₀²·t).
pub fn solve_relaxed_harmonic_analytic<R: Real>(
    sigma2_0: R,
    t: R,
    p: &PhysicalParams<R>,
) -> Result<R> {
    let eq = relaxed_fixed_point(p)?;
    let rate = two::<R>() * p.diffusion() * p.beta * p.mass * p.omega0 * p.omega0;
    Ok(eq + (sigma2_0 - eq) * (-rate * t).exp())
}

/// Constant-σ⁴ reduction: 2D(1 + λ_T²/σ² − βmω₀²σ²); exactly the free
/// quantum growth law when ω₀ = 0.
pub fn rhs_constant_sigma<R: Real>(sigma2: R, p: &PhysicalParams<R>) -> Result<R> {
    if !(sigma2 > R::zero()) {
        return Err(Error::Singular(format!(
            "rhs_constant_sigma: sigma2 = {sigma2} is not > 0"
        )));
    }
    let lt = p.lambda_t();
    Ok(two::<R>()
        * p.diffusion()
        * (R::one() + lt * lt / sigma2 - p.beta * p.mass * p.omega0 * p.omega0 * sigma2))
}

/// Positive root of βmω₀²σ⁴ − σ² − λ_T² = 0, the harmonic fixed point of
/// [`rhs_constant_sigma`].
pub fn constant_sigma_fixed_point<R: Real>(p: &PhysicalParams<R>) -> Result<R> {
    if p.is_free() {
        return Err(Error::Degenerate(
            "constant-σ fixed point needs omega0 > 0".into(),
        ));
    }
    let a = p.beta * p.mass * p.omega0 * p.omega0;
    let lt = p.lambda_t();
    Ok((R::one() + (R::one() + cst::<R>(4.0) * a * lt * lt).sqrt()) / (two::<R>() * a))
}

/// Exact free-particle dispersion σ² = λ_T²{−1 − W₋₁[−exp(−1 − 2Dt/λ_T²)]}.
///
/// Strictly increasing in t, 0 at t = 0 (the W argument sits on the branch
/// point there).
pub fn solve_free_closed_form<R: Real>(t: R, p: &PhysicalParams<R>) -> Result<R> {
    if !p.is_free() {
        return Err(Error::Degenerate(
            "closed form holds for the free particle (omega0 = 0)".into(),
        ));
    }
    if p.is_classical() {
        return Err(Error::Degenerate(
            "hbar = 0: the dispersion is the classical 2Dt".into(),
        ));
    }
    if t < R::zero() {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    let lt2 = p.lambda_t() * p.lambda_t();
    let u = R::one() + two::<R>() * p.diffusion() * t / lt2;
    let w = lambert_wm1_neg_exp(u)?;
    Ok(lt2 * (-R::one() - w))
}

/// Elementary approximation 2Dt + 2λ_T²·ln(1 + √(Dt)/λ_T) of the free
/// closed form; reduces to 2λ_T√(Dt) = ħ√(t/(mζ)) at short times.
pub fn elementary_approx_free<R: Real>(t: R, p: &PhysicalParams<R>) -> R {
    let d = p.diffusion();
    let lt = p.lambda_t();
    if lt == R::zero() {
        return two::<R>() * d * t;
    }
    two::<R>() * d * t + two::<R>() * lt * lt * ((d * t).sqrt() / lt).ln_1p()
}

/// Semiclassical log law 2Dt + λ_T²·ln t + const (t > 0).
pub fn log_law_free<R: Real>(t: R, constant: R, p: &PhysicalParams<R>) -> Result<R> {
    if !(t > R::zero()) {
        return Err(Error::Domain(format!(
            "log law defined for t > 0, got {t}"
        )));
    }
    let lt = p.lambda_t();
    Ok(two::<R>() * p.diffusion() * t + lt * lt * t.ln() + constant)
}

/// Fits the log-law constant against the exact closed form: the mean of
/// σ²_exact(t) − 2Dt − λ_T²·ln t over a geometric grid in [t_lo, t_hi].
pub fn fit_log_law_const<R: Real>(p: &PhysicalParams<R>, t_lo: R, t_hi: R, n: usize) -> Result<R> {
    if !(t_lo > R::zero()) || !(t_hi > t_lo) || n < 2 {
        return Err(Error::InvalidParam {
            name: "fit_log_law_const",
            reason: "need 0 < t_lo < t_hi and n >= 2".into(),
        });
    }
    let lt = p.lambda_t();
    let d = p.diffusion();
    let ratio = (t_hi / t_lo).ln();
    let mut acc = R::zero();
    for i in 0..n {
        let f = R::from_usize(i).unwrap() / R::from_usize(n - 1).unwrap();
        let t = t_lo * (ratio * f).exp();
        let exact = solve_free_closed_form(t, p)?;
        acc += exact - two::<R>() * d * t - lt * lt * t.ln();
    }
    Ok(acc / R::from_usize(n).unwrap())
}

/// Friction model entering the early-time law through ∂_β(βζ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZetaModel<R: Real> {
    /// β-independent friction: ∂_β(βζ) = ζ.
    Constant,
    /// Arrhenius D(β) = D₀e^{−βE_a}: ∂_β(βζ) = E_a/D(β).
    Arrhenius(ArrheniusModel<R>),
}

/// Early-time quantum law σ² = √(ħ²·t/(m·∂_β(βζ))).
///
/// With constant ζ this is σ = (ħ²t/mζ)^{1/4}; with the Arrhenius model it
/// equals 2λ_E√(Dt).
pub fn early_power_law<R: Real>(t: R, p: &PhysicalParams<R>, zeta: &ZetaModel<R>) -> Result<R> {
    if t < R::zero() {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    let dbz = match zeta {
        ZetaModel::Constant => p.friction,
        ZetaModel::Arrhenius(model) => arrhenius_diffusion(model, p, p.beta)?.d_beta_beta_zeta,
    };
    if !(dbz > R::zero()) {
        return Err(Error::Singular(format!(
            "early_power_law: d(beta*zeta)/dbeta = {dbz} is not > 0"
        )));
    }
    Ok((p.hbar * p.hbar * t / (p.mass * dbz)).sqrt())
}

/// Classical dispersion from σ²(0) = sigma2_0: the Einstein law σ₀² + 2Dt
/// for a free particle, the Ornstein-Uhlenbeck relaxation for ω₀ > 0.
pub fn classical_dispersion<R: Real>(t: R, sigma2_0: R, p: &PhysicalParams<R>) -> R {
    if p.is_free() {
        sigma2_0 + two::<R>() * p.diffusion() * t
    } else {
        let eq = (p.beta * p.mass * p.omega0 * p.omega0).recip();
        let rate = two::<R>() * p.diffusion() * p.beta * p.mass * p.omega0 * p.omega0;
        eq + (sigma2_0 - eq) * (-rate * t).exp()
    }
}

/// Closed-form trajectory on a time grid (free particle, ħ > 0).
pub fn trajectory_closed_form<R: Real>(
    p: &PhysicalParams<R>,
    t_grid: &[R],
) -> Result<DispersionTrajectory<R>> {
    let sigma2 = t_grid
        .iter()
        .map(|&t| solve_free_closed_form(t, p))
        .collect::<Result<Vec<_>>>()?;
    DispersionTrajectory::new(t_grid.to_vec(), sigma2, DispersionMode::ClosedForm, *p)
}

/// Elementary-approximation trajectory on a time grid.
pub fn trajectory_elementary<R: Real>(
    p: &PhysicalParams<R>,
    t_grid: &[R],
) -> Result<DispersionTrajectory<R>> {
    let sigma2 = t_grid.iter().map(|&t| elementary_approx_free(t, p)).collect();
    DispersionTrajectory::new(
        t_grid.to_vec(),
        sigma2,
        DispersionMode::ElementaryApprox,
        *p,
    )
}

/// Log-law trajectory on a (strictly positive) time grid.
pub fn trajectory_log_law<R: Real>(
    p: &PhysicalParams<R>,
    constant: R,
    t_grid: &[R],
) -> Result<DispersionTrajectory<R>> {
    let sigma2 = t_grid
        .iter()
        .map(|&t| log_law_free(t, constant, p))
        .collect::<Result<Vec<_>>>()?;
    DispersionTrajectory::new(t_grid.to_vec(), sigma2, DispersionMode::LogLaw, *p)
}

/// Early-power-law trajectory on a time grid.
pub fn trajectory_early_power<R: Real>(
    p: &PhysicalParams<R>,
    zeta: &ZetaModel<R>,
    t_grid: &[R],
) -> Result<DispersionTrajectory<R>> {
    let sigma2 = t_grid
        .iter()
        .map(|&t| early_power_law(t, p, zeta))
        .collect::<Result<Vec<_>>>()?;
    DispersionTrajectory::new(t_grid.to_vec(), sigma2, DispersionMode::EarlyPower, *p)
}

/// Relaxed-mode trajectory (analytic) from σ²(0) = sigma2_0.
pub fn trajectory_relaxed<R: Real>(
    p: &PhysicalParams<R>,
    sigma2_0: R,
    t_grid: &[R],
) -> Result<DispersionTrajectory<R>> {
    let sigma2 = t_grid
        .iter()
        .map(|&t| solve_relaxed_harmonic_analytic(sigma2_0, t, p))
        .collect::<Result<Vec<_>>>()?;
    DispersionTrajectory::new(t_grid.to_vec(), sigma2, DispersionMode::Relaxed, *p)
}

/// Numeric constant-σ⁴ trajectory from σ²(0) = sigma2_0, or from a quench at
/// the origin when `sigma2_0` is `None`.
///
/// A quench starts at the analytic seed σ²(t_seed) = 2λ_T√(D·t_seed),
/// t_seed = 1e−8·t_cross, because the right-hand side is singular at σ² = 0;
/// samples at or below t_seed get the seed law directly. With ħ = 0 the
/// classical solution is returned (the quantum term vanishes).
pub fn trajectory_constant_sigma<R: Real>(
    p: &PhysicalParams<R>,
    sigma2_0: Option<R>,
    t_grid: &[R],
    opts: &OdeOptions<R>,
) -> Result<DispersionTrajectory<R>> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParam {
            name: "t_grid",
            reason: "empty time grid".into(),
        });
    }
    if t_grid[0] < R::zero() {
        return Err(Error::Domain("time grid must start at t >= 0".into()));
    }

    if p.is_classical() {
        let s0 = sigma2_0.unwrap_or(R::zero());
        let sigma2 = t_grid
            .iter()
            .map(|&t| classical_dispersion(t, s0, p))
            .collect();
        return DispersionTrajectory::new(
            t_grid.to_vec(),
            sigma2,
            DispersionMode::ConstantSigma,
            *p,
        );
    }

    match sigma2_0 {
        Some(s0) => {
            if !(s0 > R::zero()) {
                return Err(Error::Singular(format!(
                    "initial dispersion must be > 0, got {s0}"
                )));
            }
            let mut grid = Vec::with_capacity(t_grid.len() + 1);
            let mut skip_first = false;
            if t_grid[0] > R::zero() {
                grid.push(R::zero());
                skip_first = true;
            }
            grid.extend_from_slice(t_grid);
            let traj = integrate_dispersion_ode(
                |_t, s| rhs_constant_sigma(s, p),
                s0,
                &grid,
                opts,
                DispersionMode::ConstantSigma,
                p,
            )?;
            let start = usize::from(skip_first);
            DispersionTrajectory::new(
                t_grid.to_vec(),
                traj.sigma2()[start..].to_vec(),
                DispersionMode::ConstantSigma,
                *p,
            )
        }
        None => {
            let d = p.diffusion();
            let lt = p.lambda_t();
            let t_seed = cst::<R>(SEED_TIME_FRACTION) * p.t_cross();
            let seed_law = |t: R| two::<R>() * lt * (d * t).sqrt();
            let mut sigma2 = vec![R::zero(); t_grid.len()];
            let mut first_past = t_grid.len();
            for (i, &t) in t_grid.iter().enumerate() {
                if t <= t_seed {
                    sigma2[i] = seed_law(t);
                } else {
                    first_past = i;
                    break;
                }
            }
            if first_past < t_grid.len() {
                let mut grid = vec![t_seed];
                grid.extend_from_slice(&t_grid[first_past..]);
                let traj = integrate_dispersion_ode(
                    |_t, s| rhs_constant_sigma(s, p),
                    seed_law(t_seed),
                    &grid,
                    opts,
                    DispersionMode::ConstantSigma,
                    p,
                )?;
                sigma2[first_past..].copy_from_slice(&traj.sigma2()[1..]);
            }
            DispersionTrajectory::new(
                t_grid.to_vec(),
                sigma2,
                DispersionMode::ConstantSigma,
                *p,
            )
        }
    }
}
