//! Property-based invariants across the special functions and diagnostics.

use proptest::prelude::*;

use qsd_core::analysis::{compare_trajectories, crossover_scales, local_exponent};
use qsd_core::dispersion::{
    elementary_approx_free, solve_free_closed_form, DispersionMode, DispersionTrajectory,
};
use qsd_core::model::{ArrheniusModel, PhysicalParams};
use qsd_core::specfun::{branch_point, coth_stable, lambert_w0, lambert_wm1};

fn rel_residual(w: f64, x: f64) -> f64 {
    (w * w.exp() - x).abs() / x.abs().max(1e-300)
}

fn free_params(hbar: f64) -> PhysicalParams<f64> {
    PhysicalParams::new(1.0, 1.0, 1.0, hbar, 0.0).unwrap()
}

proptest! {
    #[test]
    fn w0_round_trip_near_branch_and_beyond(log_off in -12.0..1.0f64) {
        // offsets from −1/e spanning thirteen decades
        let x = branch_point::<f64>() + 10f64.powf(log_off);
        let w = lambert_w0(x).unwrap();
        prop_assert!(w >= -1.0);
        prop_assert!(rel_residual(w, x) <= 1e-12);
    }

    #[test]
    fn wm1_round_trip_log_uniform(log_mag in -250.0..-0.433f64) {
        // |x| from just under 1/e down to 1e−250
        let x = -(10f64.powf(log_mag));
        prop_assume!(x > branch_point::<f64>());
        let w = lambert_wm1(x).unwrap();
        prop_assert!(w <= -1.0);
        prop_assert!(rel_residual(w, x) <= 1e-12);
    }

    #[test]
    fn branch_ordering_inside_common_domain(frac in 1e-9..0.999_999f64) {
        let x = branch_point::<f64>() * frac;
        let w0 = lambert_w0(x).unwrap();
        let wm1 = lambert_wm1(x).unwrap();
        prop_assert!(wm1 <= -1.0);
        prop_assert!(w0 >= -1.0);
        prop_assert!(wm1 < w0);
    }

    #[test]
    fn branch_monotonicity(frac in 1e-6..0.999f64, bump in 1e-4..0.5f64) {
        // x1 < x2 in (−1/e, 0)
        let x1 = branch_point::<f64>() * frac;
        let x2 = x1 * (1.0 - bump); // closer to zero
        prop_assert!(lambert_w0(x2).unwrap() > lambert_w0(x1).unwrap());
        prop_assert!(lambert_wm1(x2).unwrap() < lambert_wm1(x1).unwrap());
    }

    #[test]
    fn coth_bounds_and_tail_growth(u in 1e-6..17.0f64, du in 1e-3..1.0f64) {
        // strictly above 1 until 2/(e^{2u}−1) drops below f64 resolution
        let c = coth_stable(u).unwrap();
        prop_assert!(c > 1.0);
        // coth(u) − 1/u is increasing
        let u2 = u + du;
        let tail = |v: f64| coth_stable(v).unwrap() - 1.0 / v;
        prop_assert!(tail(u2) > tail(u));
    }

    #[test]
    fn coth_saturates_from_above(u in 18.0..400.0f64) {
        let c = coth_stable(u).unwrap();
        prop_assert!(c >= 1.0);
        prop_assert!((c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exponent_exact_on_synthetic_power_laws(a in 0.05..1.0f64, c in 0.1..10.0f64) {
        let times: Vec<f64> = (0..48)
            .map(|i| 1e-3 * (1e6f64).powf(i as f64 / 47.0))
            .collect();
        let sigma2: Vec<f64> = times.iter().map(|t| (c * t.powf(a)).powi(2)).collect();
        let traj = DispersionTrajectory::new(
            times, sigma2, DispersionMode::ClosedForm, free_params(1.0),
        ).unwrap();
        let series = local_exponent(&traj).unwrap();
        for alpha in series.alpha {
            prop_assert!((alpha - a).abs() <= 1e-8);
        }
    }

    #[test]
    fn crossover_scales_homogeneous_in_hbar(k in 0.1..10.0f64, hbar in 0.1..5.0f64) {
        let p = free_params(hbar);
        let pk = free_params(k * hbar);
        let arr = ArrheniusModel::new(1.0, 2.0).unwrap();
        let s = crossover_scales(&p, Some(&arr));
        let sk = crossover_scales(&pk, Some(&arr));
        prop_assert!((sk.lambda_t / s.lambda_t - k).abs() < 1e-10);
        prop_assert!((sk.lambda_e.unwrap() / s.lambda_e.unwrap() - k).abs() < 1e-10);
        prop_assert!((sk.t_cross / s.t_cross - k * k).abs() / (k * k) < 1e-10);
    }

    #[test]
    fn quantum_enhancement_strictly_positive(log_t in -6.0..3.0f64) {
        // 2Dt < elementary approx and 2Dt < closed form for all t > 0
        let p = free_params(1.0);
        let t = 10f64.powf(log_t) * p.t_cross();
        let classical = 2.0 * p.diffusion() * t;
        prop_assert!(elementary_approx_free(t, &p) > classical);
        prop_assert!(solve_free_closed_form(t, &p).unwrap() > classical);
    }

    #[test]
    fn comparison_metrics_symmetric(scale in 0.5..2.0f64) {
        let p = free_params(1.0);
        let times: Vec<f64> = (1..40).map(|i| i as f64 * 0.25).collect();
        let s1: Vec<f64> = times.iter().map(|t| 2.0 * t).collect();
        let s2: Vec<f64> = times.iter().map(|t| 2.0 * t * scale).collect();
        let a = DispersionTrajectory::new(
            times.clone(), s1, DispersionMode::ClosedForm, p,
        ).unwrap();
        let b = DispersionTrajectory::new(
            times, s2, DispersionMode::ElementaryApprox, p,
        ).unwrap();
        let d1 = compare_trajectories(&a, &b).unwrap();
        let d2 = compare_trajectories(&b, &a).unwrap();
        prop_assert!((d1.max_rel_err - d2.max_rel_err).abs() < 1e-15);
        prop_assert!((d1.l2_rel_err - d2.l2_rel_err).abs() < 1e-15);
    }
}
