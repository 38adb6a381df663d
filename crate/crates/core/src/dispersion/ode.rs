//! Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)) for the
//! dispersion equations.
//!
//! The solver steps exactly onto every requested sample time, controls the
//! local error with the embedded 4th-order estimate, and optionally enforces
//! positivity of the state (σ² must stay > 0). A right-hand side returning
//! an error mid-stage is treated like an oversized step: the step is halved
//! and retried until the size underflows.

use crate::error::{Error, Result};
use crate::scalar::{cst, Real};

use super::{DispersionMode, DispersionTrajectory};
use crate::model::PhysicalParams;

/// Tolerances and guards for the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<R: Real> {
    /// Relative tolerance on each state component.
    pub rel_tol: R,
    /// Absolute tolerance, in σ² units.
    pub abs_tol: R,
    /// Ceiling on attempted steps across the whole integration.
    pub max_steps: u64,
    /// Optional explicit first step; otherwise 1e−6 of the sample span.
    pub initial_step: Option<R>,
}

impl<R: Real> Default for OdeOptions<R> {
    fn default() -> Self {
        Self {
            rel_tol: cst(1e-9),
            abs_tol: cst(1e-12),
            max_steps: 1_000_000,
            initial_step: None,
        }
    }
}

/// Integrates dσ²/dt = rhs(t, σ²) from `(t_grid[0], sigma2_0)` and samples
/// onto the full grid. The state is kept strictly positive.
pub fn integrate_dispersion_ode<R: Real>(
    mut rhs: impl FnMut(R, R) -> Result<R>,
    sigma2_0: R,
    t_grid: &[R],
    opts: &OdeOptions<R>,
    mode: DispersionMode,
    params: &PhysicalParams<R>,
) -> Result<DispersionTrajectory<R>> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParam {
            name: "t_grid",
            reason: "empty time grid".into(),
        });
    }
    if !(sigma2_0 > R::zero()) {
        return Err(Error::Singular(format!(
            "initial dispersion must be > 0, got {sigma2_0}"
        )));
    }
    let states = integrate_adaptive(
        &mut |t, y: &[R], dy: &mut [R]| {
            dy[0] = rhs(t, y[0])?;
            Ok(())
        },
        t_grid[0],
        &[sigma2_0],
        &t_grid[1..],
        opts,
        true,
    )?;
    let mut sigma2 = Vec::with_capacity(t_grid.len());
    sigma2.push(sigma2_0);
    sigma2.extend(states.into_iter().map(|y| y[0]));
    DispersionTrajectory::new(t_grid.to_vec(), sigma2, mode, *params)
}

// Dormand-Prince 5(4) tableau (f64 form; lifted into R once per call).
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// b5 − b4: weights of the embedded error estimate.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Tableau<R> {
    a: [[R; 6]; 6],
    c: [R; 6],
    b: [R; 7],
    e: [R; 7],
}

impl<R: Real> Tableau<R> {
    fn new() -> Self {
        let mut a = [[R::zero(); 6]; 6];
        for (s, row) in A.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                a[s][j] = cst(v);
            }
        }
        let mut c = [R::zero(); 6];
        let mut b = [R::zero(); 7];
        let mut e = [R::zero(); 7];
        for (i, &v) in C.iter().enumerate() {
            c[i] = cst(v);
        }
        for (i, &v) in B.iter().enumerate() {
            b[i] = cst(v);
        }
        for (i, &v) in E.iter().enumerate() {
            e[i] = cst(v);
        }
        Self { a, c, b, e }
    }
}

/// Right-hand side of a vector ODE, writing dy/dt into the output slice.
pub(crate) type VecRhs<'a, R> = dyn FnMut(R, &[R], &mut [R]) -> Result<()> + 'a;

/// Vector-state adaptive integrator used by both the scalar dispersion ODEs
/// and the β-resolved family. Returns the state at each sample time.
pub(crate) fn integrate_adaptive<R: Real>(
    rhs: &mut VecRhs<'_, R>,
    t0: R,
    y0: &[R],
    sample_times: &[R],
    opts: &OdeOptions<R>,
    positive: bool,
) -> Result<Vec<Vec<R>>> {
    let dim = y0.len();
    let mut prev = t0;
    for &ts in sample_times {
        if !(ts >= prev) {
            return Err(Error::InvalidParam {
                name: "t_grid",
                reason: "sample times must be non-decreasing and >= the initial time".into(),
            });
        }
        prev = ts;
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(sample_times.len());
    let span = match sample_times.last() {
        Some(&last) if last > t0 => last - t0,
        _ => {
            for _ in sample_times {
                out.push(y.clone());
            }
            return Ok(out);
        }
    };

    let tab = Tableau::<R>::new();
    let mut h = opts.initial_step.unwrap_or(span * cst(1e-6));
    // a step underflows when it no longer advances the clock
    let h_floor = cst::<R>(1e-300);
    let mut k = vec![vec![R::zero(); dim]; 7];
    let mut y_stage = vec![R::zero(); dim];
    let mut y_new = vec![R::zero(); dim];
    let mut steps: u64 = 0;

    for &ts in sample_times {
        while t < ts {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepFailure(format!(
                    "exceeded {} steps at t = {t}",
                    opts.max_steps
                )));
            }
            let h_step = h.min(ts - t);
            if h_step < h_floor || t + h_step == t {
                return Err(Error::StepFailure(format!("step size underflow at t = {t}")));
            }

            let stage_ok = try_step(rhs, t, &y, h_step, &tab, &mut k, &mut y_stage, &mut y_new);
            match stage_ok {
                Ok(()) => {}
                Err(Error::StepFailure(msg)) => return Err(Error::StepFailure(msg)),
                Err(_) => {
                    // rhs rejected a trial state; treat like a too-large step
                    h = h_step * cst(0.5);
                    continue;
                }
            }

            if positive && y_new.iter().any(|&v| !(v > R::zero())) {
                h = h_step * cst(0.5);
                if h < h_floor || t + h == t {
                    return Err(Error::StepFailure(format!(
                        "dispersion became nonpositive at t = {t}"
                    )));
                }
                continue;
            }

            // scaled RMS norm of the embedded error estimate
            let mut err2 = R::zero();
            for i in 0..dim {
                let mut e = R::zero();
                for (s, ks) in k.iter().enumerate() {
                    e += tab.e[s] * ks[i];
                }
                e *= h_step;
                let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
                let r = e / sc;
                err2 += r * r;
            }
            let err = (err2 / R::from_usize(dim).unwrap()).sqrt();

            if err <= R::one() {
                t += h_step;
                y.copy_from_slice(&y_new);
                let grow = cst::<R>(0.9) * err.max(cst(1e-10)).powf(cst(-0.2));
                h = h_step * grow.min(cst(5.0)).max(cst(0.2));
            } else {
                let shrink = cst::<R>(0.9) * err.powf(cst(-0.2));
                h = h_step * shrink.min(cst(0.9)).max(cst(0.2));
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn try_step<R: Real>(
    rhs: &mut VecRhs<'_, R>,
    t: R,
    y: &[R],
    h: R,
    tab: &Tableau<R>,
    k: &mut [Vec<R>],
    y_stage: &mut [R],
    y_new: &mut [R],
) -> Result<()> {
    let dim = y.len();
    {
        let (k0, _) = k.split_at_mut(1);
        rhs(t, y, &mut k0[0])?;
    }
    for s in 0..6 {
        for i in 0..dim {
            let mut sum = R::zero();
            for (j, kj) in k.iter().take(s + 1).enumerate() {
                sum += tab.a[s][j] * kj[i];
            }
            y_stage[i] = y[i] + h * sum;
        }
        let (_, rest) = k.split_at_mut(s + 1);
        rhs(t + tab.c[s] * h, y_stage, &mut rest[0])?;
    }
    for i in 0..dim {
        let mut sum = R::zero();
        for (s, ks) in k.iter().enumerate() {
            sum += tab.b[s] * ks[i];
        }
        y_new[i] = y[i] + h * sum;
    }
    Ok(())
}
