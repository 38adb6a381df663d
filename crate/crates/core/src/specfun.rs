//! Special functions behind the closed-form dispersion solutions: both real
//! branches of the Lambert W function and numerically stable
//! hyperbolic/logarithmic helpers.
//!
//! W is the inverse of w ↦ w·exp(w). The real branches W₀ (w ≥ −1) and W₋₁
//! (w ≤ −1) meet at the branch point (−1/e, −1). Both are built from scratch:
//! an asymptotic or series initial guess followed by Halley iteration, with a
//! dedicated series in p = √(2(1 + e·x)) near the branch point where Halley
//! loses an order of convergence.

use crate::error::{Error, Result};
use crate::scalar::{cst, two, Real};

/// Absolute slack past −1/e before an argument is rejected as out of domain.
const BRANCH_POINT_TOL: f64 = 1e-15;

/// Width of the window around −1/e in which the branch-point series is
/// returned directly instead of seeding Halley iteration.
const SERIES_WINDOW: f64 = 1e-6;

/// Convergence threshold scale for Halley steps: |Δw| ≤ 1e−14·(1 + |w|).
const HALLEY_TOL: f64 = 1e-14;

const MAX_HALLEY_ITERS: usize = 40;

/// The branch point of the real Lambert W function, x_min = −1/e.
///
/// Both real branches are defined only for x ≥ x_min and take the value −1
/// there.
pub fn branch_point<R: Real>() -> R {
    -(-R::one()).exp()
}

/// Principal branch W₀: the solution w ≥ −1 of w·exp(w) = x, for x ≥ −1/e.
pub fn lambert_w0<R: Real>(x: R) -> Result<R> {
    let xmin = branch_point::<R>();
    if x < xmin - cst(BRANCH_POINT_TOL) {
        return Err(Error::Domain(format!(
            "lambert_w0: x = {x} is below the branch point -1/e"
        )));
    }
    if x <= xmin {
        return Ok(-R::one());
    }
    if x == R::zero() {
        return Ok(R::zero());
    }

    let p = branch_series_p(x);
    if (x - xmin).abs() <= cst(SERIES_WINDOW) {
        return Ok(branch_series_w0(p));
    }

    let guess = if x < cst(-0.25) {
        branch_series_w0(p)
    } else if x <= cst(3.0) {
        // W₀(x) = ln(1+x) + O(x²) around the origin; good enough to seed.
        x.ln_1p()
    } else {
        let l = x.ln();
        l - l.ln() + l.ln() / l
    };
    halley(x, guess)
}

/// Secondary real branch W₋₁: the solution w ≤ −1 of w·exp(w) = x, for
/// −1/e ≤ x < 0.
pub fn lambert_wm1<R: Real>(x: R) -> Result<R> {
    let xmin = branch_point::<R>();
    if x >= R::zero() {
        return Err(Error::Domain(format!(
            "lambert_wm1: x = {x} is not negative"
        )));
    }
    if x < xmin - cst(BRANCH_POINT_TOL) {
        return Err(Error::Domain(format!(
            "lambert_wm1: x = {x} is below the branch point -1/e"
        )));
    }
    if x <= xmin {
        return Ok(-R::one());
    }
    if (x - xmin).abs() <= cst(SERIES_WINDOW) {
        return Ok(branch_series_wm1(branch_series_p(x)));
    }
    // Asymptotic form of the branch: w → ln(−x) − ln(−ln(−x)) as x → 0⁻.
    let l = (-x).ln();
    let guess = l - (-l).ln();
    halley(x, guess)
}

/// W₋₁(−exp(−u)) for u ≥ 1, computed without forming exp(−u).
///
/// Substituting w = −v turns w·exp(w) = −exp(−u) into v − ln v = u with
/// v ≥ 1, which stays well-scaled long after exp(−u) underflows (u ≳ 700).
/// Below the underflow region this delegates to [`lambert_wm1`].
pub fn lambert_wm1_neg_exp<R: Real>(u: R) -> Result<R> {
    if u < R::one() - cst(1e-12) {
        return Err(Error::Domain(format!(
            "lambert_wm1_neg_exp: u = {u} is below 1 (argument past the branch point)"
        )));
    }
    if u <= R::one() {
        return Ok(-R::one());
    }
    if u <= cst(700.0) {
        return lambert_wm1(-(-u).exp());
    }
    // Newton on g(v) = v − ln v − u; g′ = 1 − 1/v ≈ 1 here, so this is
    // quadratic from the start.
    let step_tol = cst::<R>(HALLEY_TOL).max(R::epsilon() * cst(4.0));
    let mut v = u + u.ln();
    for _ in 0..MAX_HALLEY_ITERS {
        let step = (v - v.ln() - u) / (R::one() - v.recip());
        v -= step;
        if step.abs() <= step_tol * (R::one() + v.abs()) {
            return Ok(-v);
        }
    }
    Err(Error::StepFailure(format!(
        "lambert_wm1_neg_exp: Newton did not converge at u = {u}"
    )))
}

/// coth(u) for u > 0 without overflow at large u and without cancellation at
/// small u.
///
/// Below u = 1e−2 the Laurent series 1/u + u/3 − u³/45 + 2u⁵/945 is used;
/// above it, 1 + 2/(exp(2u) − 1) via `exp_m1`. The two forms agree to better
/// than 1e−12 at the switch.
pub fn coth_stable<R: Real>(u: R) -> Result<R> {
    if u <= R::zero() {
        return Err(Error::Domain(format!("coth_stable: u = {u} is not > 0")));
    }
    if u < cst(1e-2) {
        let u2 = u * u;
        Ok(u.recip() + u / cst(3.0) - u * u2 / cst(45.0) + two::<R>() * u * u2 * u2 / cst(945.0))
    } else {
        Ok(R::one() + two::<R>() / (two::<R>() * u).exp_m1())
    }
}

/// p = √(2(1 + e·x)); the expansion variable of both branches around −1/e.
fn branch_series_p<R: Real>(x: R) -> R {
    let e = R::one().exp();
    (two::<R>() * (R::one() + e * x)).max(R::zero()).sqrt()
}

fn branch_series_w0<R: Real>(p: R) -> R {
    series_around_branch(p)
}

fn branch_series_wm1<R: Real>(p: R) -> R {
    series_around_branch(-p)
}

/// w(p) = −1 + p − p²/3 + 11p³/72 − 43p⁴/540; W₀ takes p > 0, W₋₁ takes −p.
fn series_around_branch<R: Real>(p: R) -> R {
    let c2: R = -R::one() / cst(3.0);
    let c3: R = cst(11.0 / 72.0);
    let c4: R = cst(-43.0 / 540.0);
    -R::one() + p * (R::one() + p * (c2 + p * (c3 + p * c4)))
}

/// Halley iteration on f(w) = w·exp(w) − x from the supplied guess.
///
/// Accepts on |Δw| ≤ 1e−14·(1 + |w|) or on the residual reaching its
/// floating-point noise floor; both thresholds widen to the scalar type's
/// epsilon so the f32 instantiation converges too.
fn halley<R: Real>(x: R, guess: R) -> Result<R> {
    let step_tol = cst::<R>(HALLEY_TOL).max(R::epsilon() * cst(4.0));
    let resid_tol = cst::<R>(1e-13).max(R::epsilon() * cst(8.0));
    let mut w = guess;
    for _ in 0..MAX_HALLEY_ITERS {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= resid_tol * x.abs() {
            return Ok(w);
        }
        let wp1 = w + R::one();
        let denom = ew * wp1 - (w + two()) * f / (two::<R>() * wp1);
        if denom == R::zero() || !denom.is_finite() {
            return Err(Error::StepFailure(format!(
                "lambert W Halley iteration hit a zero derivative at x = {x}"
            )));
        }
        let step = f / denom;
        w -= step;
        if step.abs() <= step_tol * (R::one() + w.abs()) {
            return Ok(w);
        }
    }
    Err(Error::StepFailure(format!(
        "lambert W Halley iteration did not converge at x = {x}"
    )))
}
