//! Regime diagnostics: local diffusion exponents, quantum-classical
//! crossover scales, and trajectory comparison metrics.
//!
//! The local exponent α(t) = d ln σ/d ln t distinguishes the regimes:
//! α = 0.5 is classical Einstein diffusion, α = 0.25 the pure-quantum
//! early-time law.

use crate::dispersion::DispersionTrajectory;
use crate::error::{Error, Result};
use crate::model::{ArrheniusModel, PhysicalParams};
use crate::scalar::{cst, two, Real};

/// Local exponent of σ(t) at the interior points of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSeries<R: Real> {
    /// Interior sample times (endpoints have no centered stencil).
    pub times: Vec<R>,
    /// α = ½·d ln σ²/d ln t by centered log-log differences.
    pub alpha: Vec<R>,
}

/// α_i = ½·(ln σ²_{i+1} − ln σ²_{i−1})/(ln t_{i+1} − ln t_{i−1}); exact for
/// power laws on any grid.
pub fn local_exponent<R: Real>(traj: &DispersionTrajectory<R>) -> Result<ExponentSeries<R>> {
    local_exponent_raw(traj.times(), traj.sigma2())
}

/// Exponent estimator on raw arrays; everything must be strictly positive.
pub fn local_exponent_raw<R: Real>(times: &[R], sigma2: &[R]) -> Result<ExponentSeries<R>> {
    if times.len() != sigma2.len() || times.len() < 3 {
        return Err(Error::InvalidParam {
            name: "trajectory",
            reason: "need at least 3 aligned samples for a centered exponent".into(),
        });
    }
    if times.iter().any(|&t| !(t > R::zero())) {
        return Err(Error::Domain(
            "local exponent needs strictly positive times".into(),
        ));
    }
    if sigma2.iter().any(|&s| !(s > R::zero())) {
        return Err(Error::Domain(
            "local exponent needs strictly positive dispersions".into(),
        ));
    }
    let half = R::one() / two::<R>();
    let mut out_t = Vec::with_capacity(times.len() - 2);
    let mut out_a = Vec::with_capacity(times.len() - 2);
    for i in 1..times.len() - 1 {
        let dlns = sigma2[i + 1].ln() - sigma2[i - 1].ln();
        let dlnt = times[i + 1].ln() - times[i - 1].ln();
        out_t.push(times[i]);
        out_a.push(half * dlns / dlnt);
    }
    Ok(ExponentSeries {
        times: out_t,
        alpha: out_a,
    })
}

/// The characteristic scales of the quantum-classical crossover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverScales<R: Real> {
    /// Time at which the classical dispersion 2Dt reaches λ_T².
    pub t_cross: R,
    /// Thermal de Broglie length ħ/(2√(m k_BT)).
    pub lambda_t: R,
    /// Activation length ħ/(2√(m E_a)), when an Arrhenius model is supplied.
    pub lambda_e: Option<R>,
    /// Dispersion at which the quantum enhancement of the free growth rate
    /// drops to 10%: σ² = 10·λ_T².
    pub sigma2_quantum_10pct: R,
}

pub fn crossover_scales<R: Real>(
    p: &PhysicalParams<R>,
    arrhenius: Option<&ArrheniusModel<R>>,
) -> CrossoverScales<R> {
    let lambda_t = p.lambda_t();
    CrossoverScales {
        t_cross: p.t_cross(),
        lambda_t,
        lambda_e: arrhenius.map(|a| a.lambda_e(p)),
        sigma2_quantum_10pct: cst::<R>(10.0) * lambda_t * lambda_t,
    }
}

/// Error metrics between two trajectories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryDeviation<R: Real> {
    /// max |a−b| / max(|a|,|b|), pointwise.
    pub max_rel_err: R,
    /// Root-mean-square of the pointwise relative errors.
    pub l2_rel_err: R,
    pub max_abs_err: R,
    /// Set when the time grids differed and `b` was resampled onto `a`.
    pub resampled: bool,
}

/// Compares σ²(t) curves pointwise. Identical grids are compared directly;
/// otherwise `b` is resampled onto the overlap of `a`'s grid by monotone
/// cubic interpolation in (ln t, ln σ²), which preserves positivity and
/// local exponents.
pub fn compare_trajectories<R: Real>(
    a: &DispersionTrajectory<R>,
    b: &DispersionTrajectory<R>,
) -> Result<TrajectoryDeviation<R>> {
    if a.times() == b.times() {
        return Ok(metrics(a.sigma2(), b.sigma2(), false));
    }

    let (bt, bs) = positive_part(b.times(), b.sigma2());
    if bt.len() < 2 {
        return Err(Error::Degenerate(
            "trajectory b has fewer than 2 positive samples".into(),
        ));
    }
    let lo = bt[0];
    let hi = bt[bt.len() - 1];
    let mut at = Vec::new();
    let mut as2 = Vec::new();
    for (t, s) in a.iter() {
        if t >= lo && t <= hi && t > R::zero() && s > R::zero() {
            at.push(t);
            as2.push(s);
        }
    }
    if at.is_empty() {
        return Err(Error::Degenerate(
            "trajectories have no overlapping time range".into(),
        ));
    }

    let ln_t: Vec<R> = bt.iter().map(|t| t.ln()).collect();
    let ln_s: Vec<R> = bs.iter().map(|s| s.ln()).collect();
    let slopes = pchip_slopes(&ln_t, &ln_s);
    let resampled: Vec<R> = at
        .iter()
        .map(|&t| pchip_eval(&ln_t, &ln_s, &slopes, t.ln()).exp())
        .collect();
    Ok(metrics(&as2, &resampled, true))
}

fn positive_part<R: Real>(t: &[R], s: &[R]) -> (Vec<R>, Vec<R>) {
    let mut ts = Vec::with_capacity(t.len());
    let mut ss = Vec::with_capacity(s.len());
    for (&ti, &si) in t.iter().zip(s) {
        if ti > R::zero() && si > R::zero() {
            ts.push(ti);
            ss.push(si);
        }
    }
    (ts, ss)
}

fn metrics<R: Real>(a: &[R], b: &[R], resampled: bool) -> TrajectoryDeviation<R> {
    let floor = cst::<R>(1e-300);
    let mut max_rel = R::zero();
    let mut sum_rel2 = R::zero();
    let mut max_abs = R::zero();
    for (&x, &y) in a.iter().zip(b) {
        let abs = (x - y).abs();
        let rel = abs / x.abs().max(y.abs()).max(floor);
        max_rel = max_rel.max(rel);
        max_abs = max_abs.max(abs);
        sum_rel2 += rel * rel;
    }
    let n = R::from_usize(a.len().max(1)).unwrap();
    TrajectoryDeviation {
        max_rel_err: max_rel,
        l2_rel_err: (sum_rel2 / n).sqrt(),
        max_abs_err: max_abs,
        resampled,
    }
}

/// Fritsch-Carlson monotone cubic slopes: interpolation through monotone
/// data stays monotone, so log-log resampling cannot invent extrema.
fn pchip_slopes<R: Real>(x: &[R], y: &[R]) -> Vec<R> {
    let n = x.len();
    let mut d = vec![R::zero(); n - 1];
    for i in 0..n - 1 {
        d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    }
    let mut m = vec![R::zero(); n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= R::zero() {
            m[i] = R::zero();
        } else {
            // weighted harmonic mean of the neighbouring secants
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let w1 = two::<R>() * h1 + h0;
            let w2 = h1 + two::<R>() * h0;
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    // clamp endpoint slopes to preserve monotonicity
    for (i, edge) in [(0usize, 0usize), (n - 1, n - 2)] {
        if m[i] * d[edge] <= R::zero() {
            m[i] = R::zero();
        } else if m[i].abs() > cst::<R>(3.0) * d[edge].abs() {
            m[i] = cst::<R>(3.0) * d[edge];
        }
    }
    m
}

fn pchip_eval<R: Real>(x: &[R], y: &[R], m: &[R], xq: R) -> R {
    let n = x.len();
    // clamp to the data range; callers restrict queries to the overlap
    if xq <= x[0] {
        return y[0];
    }
    if xq >= x[n - 1] {
        return y[n - 1];
    }
    let mut lo = 0usize;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if x[mid] <= xq {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let h = x[lo + 1] - x[lo];
    let t = (xq - x[lo]) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let three = cst::<R>(3.0);
    let h00 = two::<R>() * t3 - three * t2 + R::one();
    let h10 = t3 - two::<R>() * t2 + t;
    let h01 = -two::<R>() * t3 + three * t2;
    let h11 = t3 - t2;
    h00 * y[lo] + h10 * h * m[lo] + h01 * y[lo + 1] + h11 * h * m[lo + 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{DispersionMode, DispersionTrajectory};

    fn free_params() -> PhysicalParams<f64> {
        PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.0).unwrap()
    }

    fn power_law_traj(a: f64, c: f64, n: usize) -> DispersionTrajectory<f64> {
        // geometric grid over six decades
        let times: Vec<f64> = (0..n)
            .map(|i| 1e-3 * (1e6f64).powf(i as f64 / (n - 1) as f64))
            .collect();
        let sigma2: Vec<f64> = times.iter().map(|t| (c * t.powf(a)).powi(2)).collect();
        DispersionTrajectory::new(times, sigma2, DispersionMode::ClosedForm, free_params())
            .unwrap()
    }

    #[test]
    fn exponent_exact_on_power_laws() {
        for &(a, c) in &[(0.5, 1.3), (0.25, 0.7), (0.37, 2.0)] {
            let traj = power_law_traj(a, c, 64);
            let series = local_exponent(&traj).unwrap();
            assert_eq!(series.times.len(), 62);
            for &alpha in &series.alpha {
                assert!((alpha - a).abs() <= 1e-8, "alpha = {alpha}, expect {a}");
            }
        }
    }

    #[test]
    fn exponent_rejects_nonpositive_input() {
        let p = free_params();
        let traj = DispersionTrajectory::new(
            vec![0.0, 1.0, 2.0],
            vec![0.0, 1.0, 2.0],
            DispersionMode::ClosedForm,
            p,
        )
        .unwrap();
        assert!(matches!(local_exponent(&traj), Err(Error::Domain(_))));
    }

    #[test]
    fn crossover_scale_relations() {
        let p = free_params();
        // Ea = k_BT makes λ_E = λ_T; Ea = 4k_BT halves it
        let a1 = ArrheniusModel::new(1.0, 1.0 / p.beta).unwrap();
        let s1 = crossover_scales(&p, Some(&a1));
        assert!((s1.lambda_e.unwrap() - s1.lambda_t).abs() < 1e-15);
        let a4 = ArrheniusModel::new(1.0, 4.0 / p.beta).unwrap();
        let s4 = crossover_scales(&p, Some(&a4));
        assert!((s4.lambda_e.unwrap() - s1.lambda_t / 2.0).abs() < 1e-15);
        assert!((s1.sigma2_quantum_10pct - 10.0 * s1.lambda_t * s1.lambda_t).abs() < 1e-15);
        // classical limit: every scale collapses to zero
        let pc = PhysicalParams::new(1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        let sc = crossover_scales(&pc, Some(&a1));
        assert_eq!(sc.t_cross, 0.0);
        assert_eq!(sc.lambda_t, 0.0);
        assert_eq!(sc.lambda_e.unwrap(), 0.0);
        assert_eq!(sc.sigma2_quantum_10pct, 0.0);
    }

    #[test]
    fn crossover_homogeneous_in_hbar() {
        let p = free_params();
        let k = 3.7;
        let pk = PhysicalParams { hbar: k, ..p };
        let a = ArrheniusModel::new(2.0, 0.9).unwrap();
        let s = crossover_scales(&p, Some(&a));
        let sk = crossover_scales(&pk, Some(&a));
        assert!((sk.lambda_t / s.lambda_t - k).abs() < 1e-12);
        assert!((sk.lambda_e.unwrap() / s.lambda_e.unwrap() - k).abs() < 1e-12);
        assert!((sk.t_cross / s.t_cross - k * k).abs() < 1e-12);
    }

    #[test]
    fn identical_trajectories_compare_to_zero() {
        let traj = power_law_traj(0.5, 1.0, 32);
        let dev = compare_trajectories(&traj, &traj).unwrap();
        assert_eq!(dev.max_rel_err, 0.0);
        assert_eq!(dev.l2_rel_err, 0.0);
        assert_eq!(dev.max_abs_err, 0.0);
        assert!(!dev.resampled);
    }

    #[test]
    fn relative_metrics_symmetric() {
        let a = power_law_traj(0.5, 1.0, 32);
        let b = power_law_traj(0.5, 1.1, 32);
        let d1 = compare_trajectories(&a, &b).unwrap();
        let d2 = compare_trajectories(&b, &a).unwrap();
        assert!((d1.max_rel_err - d2.max_rel_err).abs() < 1e-15);
        assert!((d1.l2_rel_err - d2.l2_rel_err).abs() < 1e-15);
    }

    #[test]
    fn resampling_recovers_power_law_values() {
        // same law sampled on different grids: deviation ~ interpolation error
        let a = power_law_traj(0.5, 1.0, 41);
        let b = power_law_traj(0.5, 1.0, 97);
        let dev = compare_trajectories(&a, &b).unwrap();
        assert!(dev.resampled);
        // log-log cubic is exact on pure power laws (linear in log space)
        assert!(dev.max_rel_err < 1e-12, "max rel {}", dev.max_rel_err);
    }

    #[test]
    fn disjoint_ranges_error() {
        let p = free_params();
        let a = DispersionTrajectory::new(
            vec![1.0, 2.0, 3.0],
            vec![1.0, 2.0, 3.0],
            DispersionMode::ClosedForm,
            p,
        )
        .unwrap();
        let b = DispersionTrajectory::new(
            vec![10.0, 20.0],
            vec![1.0, 2.0],
            DispersionMode::ClosedForm,
            p,
        )
        .unwrap();
        assert!(matches!(
            compare_trajectories(&a, &b),
            Err(Error::Degenerate(_))
        ));
    }
}
