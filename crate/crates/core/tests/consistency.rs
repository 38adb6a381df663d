//! Cross-module consistency: the independent solution routes must agree
//! wherever their domains overlap.

use qsd_core::analysis::{compare_trajectories, local_exponent};
use qsd_core::dispersion::{
    classical_dispersion, constant_sigma_fixed_point, elementary_approx_free,
    equilibrium_dispersion_harmonic, fit_log_law_const, relaxed_fixed_point, rhs_constant_sigma,
    solve_beta_resolved, solve_free_closed_form, trajectory_closed_form, trajectory_constant_sigma,
    trajectory_early_power, trajectory_elementary, trajectory_log_law, trajectory_relaxed,
    BetaInitialProfile, BetaResolvedOptions, OdeOptions, ZetaModel,
};
use qsd_core::model::{PhysicalParams, Potential};
use qsd_core::pde::{
    build_effective_fields, evolve, stationary_solution_oracle, EvolveOptions, GridSpec, PdeForm,
};

fn params(hbar: f64, omega0: f64) -> PhysicalParams<f64> {
    PhysicalParams::new(1.0, 1.0, 1.0, hbar, omega0).unwrap()
}

fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln();
    (0..n)
        .map(|i| lo * (ratio * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[test]
fn closed_form_and_ode_route_agree_over_eight_decades() {
    let p = params(1.0, 0.0);
    let tc = p.t_cross();
    let grid = geometric_grid(1e-6 * tc, 1e2 * tc, 160);
    let numeric = trajectory_constant_sigma(&p, None, &grid, &OdeOptions::default()).unwrap();
    let exact = trajectory_closed_form(&p, &grid).unwrap();
    let dev = compare_trajectories(&exact, &numeric).unwrap();
    assert!(dev.max_rel_err <= 1e-6, "max rel {}", dev.max_rel_err);
}

#[test]
fn local_exponent_of_closed_form_rises_monotonically() {
    let p = params(1.0, 0.0);
    let tc = p.t_cross();
    let grid = geometric_grid(1e-6 * tc, 1e6 * tc, 240);
    let traj = trajectory_closed_form(&p, &grid).unwrap();
    let series = local_exponent(&traj).unwrap();
    for w in series.alpha.windows(2) {
        assert!(w[1] > w[0], "exponent must rise monotonically");
    }
    assert!((series.alpha.first().unwrap() - 0.25).abs() < 0.005);
    assert!((series.alpha.last().unwrap() - 0.5).abs() < 0.005);
}

#[test]
fn harmonic_equilibria_hierarchy() {
    // βħω₀ = 0.1: the coth equilibrium and the relaxed fixed point agree to
    // O(ħ⁴); the constant-σ⁴ quadratic root sits an O(ħ²) step away, at
    // (2/3)·(βħω₀/2)² relative, and that gap is part of the contract.
    let p = params(0.1, 1.0);
    let coth = equilibrium_dispersion_harmonic(&p).unwrap();
    let relaxed = relaxed_fixed_point(&p).unwrap();
    let quad = constant_sigma_fixed_point(&p).unwrap();
    assert!(((relaxed - coth) / coth).abs() <= 1e-5);
    // the quadratic root exactly zeroes its own equation
    assert!(rhs_constant_sigma(quad, &p).unwrap().abs() < 1e-13);
    let gap = ((quad - coth) / coth).abs();
    let u = p.beta * p.hbar * p.omega0 / 2.0;
    assert!((gap - 2.0 / 3.0 * u * u).abs() < 0.05 * gap, "gap {gap}");
}

#[test]
fn all_modes_converge_to_classical_as_hbar_shrinks() {
    let hbars = [1.0, 0.1, 0.01];
    let t_grid = geometric_grid(0.1, 10.0, 40);

    let max_rel_gap = |traj: &qsd_core::Trajectory64, classical: &[f64]| {
        traj.sigma2()
            .iter()
            .zip(classical)
            .map(|(&a, &b)| (a - b).abs() / b.abs().max(1e-300))
            .fold(0.0f64, f64::max)
    };

    // free modes against the Einstein law from the same start
    let mut gaps: Vec<[f64; 5]> = Vec::new();
    for &h in &hbars {
        let p = params(h, 0.0);
        let classical: Vec<f64> = t_grid.iter().map(|&t| 2.0 * t).collect();
        let closed = trajectory_closed_form(&p, &t_grid).unwrap();
        let constant =
            trajectory_constant_sigma(&p, None, &t_grid, &OdeOptions::default()).unwrap();
        let elem = trajectory_elementary(&p, &t_grid).unwrap();
        let c = fit_log_law_const(&p, 10.0 * p.t_cross(), 1000.0 * p.t_cross(), 32).unwrap();
        let log = trajectory_log_law(&p, c, &t_grid).unwrap();
        let log_classical: Vec<f64> = t_grid.iter().map(|&t| 2.0 * t + c).collect();
        // early power law: its classical limit is the zero trajectory, so
        // the gap is the (absolute) trajectory scale itself
        let early = trajectory_early_power(&p, &ZetaModel::Constant, &t_grid).unwrap();
        gaps.push([
            max_rel_gap(&closed, &classical),
            max_rel_gap(&constant, &classical),
            max_rel_gap(&elem, &classical),
            max_rel_gap(&log, &log_classical),
            early.sigma2().iter().copied().fold(0.0, f64::max),
        ]);
    }
    #[allow(clippy::needless_range_loop)]
    for mode in 0..5 {
        assert!(
            gaps[0][mode] > gaps[1][mode] && gaps[1][mode] > gaps[2][mode],
            "mode {mode} gaps {:?} not shrinking",
            [gaps[0][mode], gaps[1][mode], gaps[2][mode]]
        );
    }

    // harmonic modes against their own ħ = 0 counterparts
    let mut gaps: Vec<[f64; 2]> = Vec::new();
    for &h in &hbars {
        let p = params(h, 1.0);
        let s0 = 0.5;
        let classical: Vec<f64> = t_grid
            .iter()
            .map(|&t| classical_dispersion(t, s0, &p))
            .collect();
        let relaxed = trajectory_relaxed(&p, s0, &t_grid).unwrap();
        let opts = BetaResolvedOptions::new(BetaInitialProfile::Uniform(s0));
        let beta = solve_beta_resolved(&p, &t_grid, &opts).unwrap().trajectory;
        gaps.push([
            max_rel_gap(&relaxed, &classical),
            max_rel_gap(&beta, &classical),
        ]);
    }
    #[allow(clippy::needless_range_loop)]
    for mode in 0..2 {
        assert!(
            gaps[0][mode] > gaps[1][mode] && gaps[1][mode] > gaps[2][mode],
            "harmonic mode {mode} gaps not shrinking"
        );
    }
}

#[test]
fn pde_free_variance_matches_dispersion_route() {
    let p = params(1.0, 0.0);
    let v = Potential::polynomial(vec![0.0], -8.0, 8.0).unwrap();
    let spec = GridSpec::new(-8.0, 8.0, 512).unwrap();
    let fields = build_effective_fields(&v, &p, PdeForm::Coffey, &spec).unwrap();
    let s0 = 0.25;
    let mut state = qsd_core::pde::GridState::gaussian(spec, 0.0, s0).unwrap();
    let base = state.moments().variance;
    for step in 1..=4 {
        let t_end = 0.02 * step as f64;
        let out = evolve(state, &fields, &p, t_end, &EvolveOptions::default()).unwrap();
        state = out.state;
        let m = state.moments();
        let expect = base + 2.0 * p.diffusion() * t_end;
        assert!(
            ((m.variance - expect) / expect).abs() < 1e-3,
            "t = {t_end}: {} vs {expect}",
            m.variance
        );
    }
}

#[test]
fn evolving_the_stationary_oracle_barely_moves_it() {
    // harmonic, coffey: L1 drift per t_cross stays below 1e−8
    let p = params(0.1, 1.0);
    let v = Potential::harmonic(p.mass, p.omega0, -8.0, 8.0).unwrap();
    let spec = GridSpec::new(-8.0, 8.0, 4096).unwrap();
    let fields = build_effective_fields(&v, &p, PdeForm::Coffey, &spec).unwrap();
    let oracle = stationary_solution_oracle(&fields, &p, &spec).unwrap();
    let tc = p.t_cross();
    let horizons = 8.0;
    let out = evolve(
        oracle.clone(),
        &fields,
        &p,
        horizons * tc,
        &EvolveOptions::default(),
    )
    .unwrap();
    let dx = spec.dx();
    let l1: f64 = oracle
        .density()
        .iter()
        .zip(out.state.density())
        .map(|(&a, &b)| (a - b).abs() * dx)
        .sum();
    let per_tcross = l1 / horizons;
    assert!(per_tcross <= 1e-8, "L1 drift per t_cross = {per_tcross}");
}

#[test]
fn grid_refinement_is_second_order_against_the_oracle() {
    // evolve the oracle for a fixed horizon at n and 2n; the drift towards
    // the discrete steady state is the O(dx²) discretization gap
    let p = params(0.1, 1.0);
    let v = Potential::harmonic(p.mass, p.omega0, -8.0, 8.0).unwrap();
    let gap_at = |n: usize| -> f64 {
        let spec = GridSpec::new(-8.0, 8.0, n).unwrap();
        let fields = build_effective_fields(&v, &p, PdeForm::Coffey, &spec).unwrap();
        let oracle = stationary_solution_oracle(&fields, &p, &spec).unwrap();
        let out = evolve(oracle.clone(), &fields, &p, 3.0, &EvolveOptions::default()).unwrap();
        let dx = spec.dx();
        oracle
            .density()
            .iter()
            .zip(out.state.density())
            .map(|(&a, &b)| (a - b).abs() * dx)
            .sum()
    };
    let coarse = gap_at(256);
    let fine = gap_at(512);
    let ratio = coarse / fine;
    assert!(
        (3.4..=4.6).contains(&ratio),
        "L1 refinement ratio {ratio} outside [3.4, 4.6]"
    );
}

#[test]
fn pde_forms_differ_only_through_the_third_derivative() {
    // a quartic double well has V‴ ≠ 0: the two drifts genuinely differ and
    // so do the stationary states
    let p = params(0.5, 0.0);
    let well = Potential::polynomial(vec![0.0, 0.0, -0.4, 0.0, 0.3], -4.0, 4.0).unwrap();
    let spec = GridSpec::new(-4.0, 4.0, 512).unwrap();
    let fc = build_effective_fields(&well, &p, PdeForm::Coffey, &spec).unwrap();
    let fa = build_effective_fields(&well, &p, PdeForm::Ankerhold, &spec).unwrap();
    assert!(!fc.validity_violated && !fa.validity_violated);
    assert_eq!(fc.d_eff, fa.d_eff);
    assert!(fc.v_eff_prime != fa.v_eff_prime);
    let sc = stationary_solution_oracle(&fc, &p, &spec).unwrap();
    let sa = stationary_solution_oracle(&fa, &p, &spec).unwrap();
    let var_gap = (sc.moments().variance - sa.moments().variance).abs();
    assert!(var_gap > 1e-6, "forms should disagree on a quartic well");
}

#[test]
fn beta_resolved_free_tracks_the_closed_form_coarsely() {
    // the β-family quench and the constant-σ closed form share the early
    // power law and the Einstein tail; they differ at mid-times where the
    // entropic term matters, but stay within a few percent
    let p = params(1.0, 0.0);
    let tc = p.t_cross();
    let grid = geometric_grid(1e-3 * tc, 1e3 * tc, 60);
    let opts = BetaResolvedOptions {
        n_beta: 128,
        profile: BetaInitialProfile::Uniform(1e-6 * p.lambda_t() * p.lambda_t()),
        ..BetaResolvedOptions::new(BetaInitialProfile::Uniform(1.0))
    };
    let fam = solve_beta_resolved(&p, &grid, &opts).unwrap().trajectory;
    let exact = trajectory_closed_form(&p, &grid).unwrap();
    let dev = compare_trajectories(&exact, &fam).unwrap();
    assert!(dev.max_rel_err < 0.25, "routes diverged: {}", dev.max_rel_err);
    // both approach the Einstein law at late times
    let last_fam = *fam.sigma2().last().unwrap();
    let last_classical = 2.0 * p.diffusion() * grid.last().unwrap();
    assert!((last_fam - last_classical).abs() / last_classical < 0.01);
}

#[test]
fn closed_form_excess_over_einstein_shrinks_logarithmically() {
    // at t = 100·t_cross the quantum excess is the log correction, a few
    // percent of the total, and it keeps shrinking relative to 2Dt
    let p = params(1.0, 0.0);
    let d = p.diffusion();
    let rel_excess = |t: f64| {
        let exact = solve_free_closed_form(t, &p).unwrap();
        (exact - 2.0 * d * t) / exact
    };
    let tc = p.t_cross();
    let at_100 = rel_excess(100.0 * tc);
    assert!((0.02..=0.06).contains(&at_100), "rel excess {at_100}");
    assert!(rel_excess(1000.0 * tc) < at_100);
    assert!(rel_excess(10_000.0 * tc) < rel_excess(1000.0 * tc));
}

#[test]
fn single_precision_stack_instantiates() {
    let p = PhysicalParams::<f32>::new(1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
    let tc = p.t_cross();
    assert!((tc - 0.125).abs() < 1e-6);
    let s = solve_free_closed_form(2.0 * tc, &p).unwrap();
    let p64 = params(1.0, 0.0);
    let s64 = solve_free_closed_form(2.0 * p64.t_cross(), &p64).unwrap() as f32;
    assert!((s - s64).abs() / s64 < 1e-4);

    let spec = GridSpec::<f32>::new(-8.0, 8.0, 128).unwrap();
    let v = Potential::polynomial(vec![0.0f32], -8.0, 8.0).unwrap();
    let fields = build_effective_fields(&v, &p, PdeForm::Coffey, &spec).unwrap();
    let state = qsd_core::pde::GridState::gaussian(spec, 0.0, 0.25).unwrap();
    let out = evolve(state, &fields, &p, 0.01, &EvolveOptions::default()).unwrap();
    let m = out.state.moments();
    assert!((m.variance - 0.27).abs() < 5e-3, "f32 variance {}", m.variance);
}

#[test]
fn elementary_approx_short_time_equals_pure_quantum_law() {
    let p = params(1.0, 0.0);
    for &t in &[1e-10, 1e-9, 1e-8] {
        let approx = elementary_approx_free(t, &p);
        let exact = solve_free_closed_form(t, &p).unwrap();
        let pure = p.hbar * (t / (p.mass * p.friction)).sqrt();
        assert!(((approx - pure) / pure).abs() < 1e-3);
        assert!(((exact - pure) / pure).abs() < 1e-3);
    }
}
