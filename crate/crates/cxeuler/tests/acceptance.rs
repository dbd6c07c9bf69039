//! End-to-end acceptance suite.
//!
//! Each test implements one acceptance criterion at its stated tolerance and
//! prints a single `PASS criterion-NN ...` line (visible with
//! `cargo test --test acceptance -- --nocapture`). Runtime budgets are part
//! of the criteria and are asserted alongside the numerics.

use cxeuler::euler2d::{
    conservation_experiment, linear_growth_check, ConserveParams, Euler2dSolver, GrowthParams,
    SolverConfig, VorticityState,
};
use cxeuler::fourier::{FourierField, NormSpec};
use cxeuler::manifold::{
    assemble_mode_operator, geometric_burgers_hyperbolicity, illposedness_experiment, pde_residual,
    picard_solve, scattering_solve, semigroup_bound_check, unstable_eigenmode, IllposedParams,
    LocalSystem, ManifoldParams,
};
use cxeuler::shear::{
    loss_of_analyticity_experiment, norm_inflation_experiment, theta_closed_form,
    AnalyticityParams, InflationParams, ShearSolver, ShearState,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use std::time::Instant;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn report(name: &str, budget_s: f64, elapsed_s: f64, detail: &str) {
    println!("PASS {name}: {detail} ({elapsed_s:.2}s, budget {budget_s:.0}s)");
    assert!(
        elapsed_s <= budget_s,
        "{name} exceeded its runtime budget: {elapsed_s:.2}s > {budget_s}s"
    );
}

/// Criterion 1: shear energy `q² + Σ|b_k|²` drifts at most 1e-10 relative
/// over t ∈ [0, 10] at dt = 1e-3 for ten random initial states, under one
/// second per state.
#[test]
fn criterion_01_shear_energy_conservation() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    let mut worst_time = 0.0f64;
    for _ in 0..10 {
        let mut b = FourierField::scalar_1d(4);
        for k in [-3i32, -2, -1, 1, 2, 3] {
            b.set1(k, c(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3))).unwrap();
        }
        let state = ShearState::new(rng.gen_range(-0.7..0.7), b, 0.0).unwrap();
        let e0 = state.energy();
        let start = Instant::now();
        let mut solver = ShearSolver::new(&state).unwrap();
        for _ in 0..10_000 {
            solver.step(1e-3).unwrap();
        }
        let elapsed = start.elapsed().as_secs_f64();
        worst_time = worst_time.max(elapsed);
        worst = worst.max((solver.energy() - e0).abs() / e0);
        assert!(elapsed < 1.0, "one state took {elapsed:.2}s");
    }
    assert!(worst <= 1e-10, "energy drift {worst:.3e}");
    report(
        "criterion-01 shear-energy-conservation",
        1.0,
        worst_time,
        &format!("max relative drift {worst:.3e} over 10 random states"),
    );
}

/// Criterion 2: the full shear solver matches the closed-form phase flow to
/// 1e-8 over t ∈ [0, 5] for (E, k, θ₀) ∈ {1,4}×{1,3}×{0.1,1.0}.
#[test]
fn criterion_02_theta_oracle_agreement() {
    let start = Instant::now();
    let dt = 2.5e-4;
    let steps = (5.0 / dt) as usize;
    let mut worst = 0.0f64;
    for energy in [1.0f64, 4.0] {
        for k in [1i32, 3] {
            for theta0 in [0.1f64, 1.0] {
                let mut b = FourierField::scalar_1d(4);
                b.set1(k, c(energy.sqrt() * theta0.sin(), 0.0)).unwrap();
                let state =
                    ShearState::new(-energy.sqrt() * theta0.cos(), b, 0.0).unwrap();
                let mut solver = ShearSolver::new(&state).unwrap();
                for n in 1..=steps {
                    solver.step(dt).unwrap();
                    let theta =
                        theta_closed_form(theta0, energy, k, n as f64 * dt).unwrap();
                    let q_exact = -energy.sqrt() * theta.cos();
                    worst = worst.max((solver.q() - q_exact).abs());
                }
            }
        }
    }
    assert!(worst <= 1e-8, "phase-oracle error {worst:.3e}");
    report(
        "criterion-02 theta-oracle",
        1.0,
        start.elapsed().as_secs_f64(),
        &format!("max |q - q_oracle| = {worst:.3e} over 8 parameter triples"),
    );
}

/// Criterion 3: norm inflation at eps = 0.1, s = 1, M = 10. The measured
/// crossing obeys T₀ ≤ 5·(π/(kε))·log⟨k⟩^s and does not grow under two
/// doublings of k.
#[test]
fn criterion_03_norm_inflation() {
    let start = Instant::now();
    let params = InflationParams::default();
    let out = norm_inflation_experiment(&params).unwrap();
    let t0 = out.t0.expect("crossing must be reached");
    assert!(out.initial_hs < params.eps, "initial size {} vs eps", out.initial_hs);
    assert!(
        out.crossing_within_bound(),
        "T0 = {t0} vs margin bound {}",
        params.margin * out.predicted_t0
    );
    assert!(out.doubling_monotone(), "doubling runs: {:?}", out.runs);
    report(
        "criterion-03 norm-inflation",
        10.0,
        start.elapsed().as_secs_f64(),
        &format!(
            "k = {}, T0 = {:.4} <= {:.4}, doublings {:?}",
            out.k_used,
            t0,
            params.margin * out.predicted_t0,
            out.runs.iter().map(|r| r.t_cross).collect::<Vec<_>>()
        ),
    );
}

/// Criterion 4: the fitted analyticity radius tracks ∫₀ᵗ q ds within 2%
/// over the late half of a K = 256, T = 2 run from the rough profile.
#[test]
fn criterion_04_analyticity_radius_law() {
    let start = Instant::now();
    let params = AnalyticityParams::default();
    assert_eq!(params.cutoff, 256);
    assert_eq!(params.t_end, 2.0);
    let out = loss_of_analyticity_experiment(&params).unwrap();
    assert!(out.q_monotone, "q must be nondecreasing");
    assert!(out.max_energy_drift <= 1e-10, "energy drift {:.3e}", out.max_energy_drift);
    assert!(
        out.max_rel_radius_err <= 0.02,
        "radius law violated: {:.4}",
        out.max_rel_radius_err
    );
    report(
        "criterion-04 analyticity-radius-law",
        10.0,
        start.elapsed().as_secs_f64(),
        &format!(
            "max relative radius error {:.3e}, slope {:.4}",
            out.max_rel_radius_err, out.fitted_slope
        ),
    );
}

/// Criterion 5: energy, bilinear enstrophy, ∫ω³ and Re mean each drift at
/// most 1e-6 relative over t ∈ [0, 1] at K = 64, dt = 1e-3 on analytic
/// complex data.
#[test]
fn criterion_05_euler2d_conservation() {
    let start = Instant::now();
    let params = ConserveParams::default();
    assert_eq!((params.cutoff, params.dt, params.t_end), (64, 1e-3, 1.0));
    let out = conservation_experiment(&params).unwrap();
    assert!(out.pass, "drifts {:?}", out.max_rel_drift);
    report(
        "criterion-05 euler2d-conservation",
        60.0,
        start.elapsed().as_secs_f64(),
        &format!("max relative drifts {:?}", out.max_rel_drift),
    );
}

/// Criterion 6: the measured growth rate of mode (1,0) under the background
/// a = (−i, 0) equals 1 within 1% at perturbation 1e-6.
#[test]
fn criterion_06_linear_instability_rate() {
    let start = Instant::now();
    let params = GrowthParams::default();
    assert_eq!(params.delta, 1e-6);
    let out = linear_growth_check(&params).unwrap();
    assert_eq!(out.predicted_rate, 1.0);
    assert!(
        (out.measured_rate - 1.0).abs() <= 0.01,
        "measured rate {}",
        out.measured_rate
    );
    report(
        "criterion-06 linear-instability-rate",
        30.0,
        start.elapsed().as_secs_f64(),
        &format!(
            "measured {:.6} vs predicted 1 (growth ×{:.1e})",
            out.measured_rate, out.growth_factor
        ),
    );
}

/// Criterion 7: y-independent complex data evolved by the shear solver and
/// by the 2-D solver agree to 1e-8 over t ∈ [0, 1].
#[test]
fn criterion_07_shear_2d_cross_consistency() {
    let start = Instant::now();
    let q0 = 0.7;
    let b_modes: [(i32, Complex64); 5] = [
        (1, c(0.30, 0.10)),
        (2, c(-0.15, 0.20)),
        (3, c(0.05, -0.08)),
        (4, c(0.02, 0.01)),
        (-2, c(0.04, -0.03)),
    ];
    let mut b = FourierField::scalar_1d(8);
    for &(k, v) in &b_modes {
        b.set1(k, v).unwrap();
    }
    let shear_state = ShearState::new(q0, b, 0.0).unwrap();

    // Same data as a 2-D vorticity state: ω̂(k, 0) = i k b_k, mean = (iq, 0).
    let cutoff = 8u32;
    let mut omega = FourierField::scalar_2d(cutoff);
    for &(k, v) in &b_modes {
        omega.set([k, 0], vec![c(0.0, k as f64) * v]).unwrap();
    }
    let mut state2d =
        VorticityState::from_field(&omega, [c(0.0, q0), c(0.0, 0.0)], 0.0).unwrap();

    let dt = 1e-3;
    let mut shear = ShearSolver::new(&shear_state).unwrap();
    let mut solver2d = Euler2dSolver::new(SolverConfig::new(cutoff, dt).unwrap());
    for _ in 0..1000 {
        shear.step(dt).unwrap();
        state2d = solver2d.step(&state2d).unwrap();
    }
    let b_shear = shear.state().b;
    let mut worst: f64 = (state2d.mean_u[0] - c(0.0, shear.q())).norm();
    worst = worst.max(state2d.mean_u[1].norm());
    for k in -(cutoff as i32)..=cutoff as i32 {
        if k == 0 {
            continue;
        }
        let b_2d = state2d.coeff([k, 0]) / c(0.0, k as f64);
        worst = worst.max((b_2d - b_shear.coeff1(k)).norm());
    }
    // The 2-D state must stay y-independent exactly.
    for k1 in -(cutoff as i32)..=cutoff as i32 {
        for k2 in -(cutoff as i32)..=cutoff as i32 {
            if k2 != 0 {
                worst = worst.max(state2d.coeff([k1, k2]).norm());
            }
        }
    }
    assert!(worst <= 1e-8, "cross-solver deviation {worst:.3e}");
    report(
        "criterion-07 shear-2d-cross-consistency",
        30.0,
        start.elapsed().as_secs_f64(),
        &format!("max deviation {worst:.3e}"),
    );
}

/// Criterion 8: the unstable-manifold fixed point at a 1e-3 unstable-mode
/// datum converges within 30 iterations to residual 1e-10, its interior PDE
/// residual is at most 1e-6 relative, and the trajectory-norm bound holds
/// with a finite measured constant.
#[test]
fn criterion_08_picard_fixed_point() {
    let start = Instant::now();
    let sys = LocalSystem::burgers();
    let params = ManifoldParams::burgers_defaults();
    let lin = sys.linearization().unwrap();
    let (unit, _) = unstable_eigenmode(&lin, 1).unwrap();
    let a0 = unit.scaled(c(1e-3, 0.0));
    let sol = picard_solve(&sys, &a0, &params).unwrap();
    assert!(sol.iterations <= 30, "iterations {}", sol.iterations);
    assert!(sol.residual <= 1e-10, "residual {:.3e}", sol.residual);
    let pde = pde_residual(&sys, &sol.trajectory).unwrap();
    assert!(pde <= 1e-6, "PDE residual {pde:.3e}");
    assert!(
        sol.bound_constant.is_finite() && sol.bound_constant >= 1.0 - 1e-9,
        "trajectory-norm constant {}",
        sol.bound_constant
    );
    assert!(sol.pu_w0_defect <= 1e-12, "unstable-trace defect {:.3e}", sol.pu_w0_defect);
    report(
        "criterion-08 picard-fixed-point",
        60.0,
        start.elapsed().as_secs_f64(),
        &format!(
            "{} iterations, residual {:.2e}, PDE residual {:.2e}, C = {:.4}",
            sol.iterations, sol.residual, pde, sol.bound_constant
        ),
    );
}

/// Criterion 9: the scattering deviation scales quadratically — halving the
/// datum norm scales ‖v‖ with exponent 2.0 ± 0.1 across three halvings.
#[test]
fn criterion_09_quadratic_scattering() {
    let start = Instant::now();
    let sys = LocalSystem::burgers();
    let params = ManifoldParams::burgers_defaults();
    let lin = sys.linearization().unwrap();
    let (unit, _) = unstable_eigenmode(&lin, 4).unwrap();
    let mut norms = Vec::new();
    for level in 0..4 {
        let b0 = unit.scaled(c(0.02 * 0.5f64.powi(level), 0.0));
        let sol = scattering_solve(&sys, &b0, &params).unwrap();
        assert!(sol.residual <= params.picard_tol, "residual {:.3e}", sol.residual);
        norms.push(sol.deviation_norm);
    }
    let exponents: Vec<f64> = norms.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    for e in &exponents {
        assert!((e - 2.0).abs() <= 0.1, "exponent {e} outside 2.0 ± 0.1");
    }
    report(
        "criterion-09 quadratic-scattering",
        120.0,
        start.elapsed().as_secs_f64(),
        &format!("halving exponents {exponents:?}"),
    );
}

/// Criterion 10: the ill-posedness sequence at s = 2, t = −0.5,
/// n ∈ {4, 8, 16}: the `H²` norms at time t strictly decrease while the
/// time-zero unstable data stay at size ≥ M, and the linear column matches
/// the exact decay to 1e-8.
#[test]
fn criterion_10_illposedness_sequence() {
    let start = Instant::now();
    let sys = LocalSystem::burgers();
    let base = ManifoldParams::burgers_defaults();
    let params = IllposedParams::default();
    assert_eq!(params.n_list, vec![4, 8, 16]);
    assert_eq!((params.sobolev_s, params.eval_time), (2.0, -0.5));
    let report_out = illposedness_experiment(&sys, &params, &base).unwrap();
    assert!(
        report_out.rows.iter().all(|r| r.skipped.is_none()),
        "rows skipped: {:?}",
        report_out.rows
    );
    assert!(report_out.decreasing, "H^s column not strictly decreasing");
    assert!(report_out.a0_above_target, "a0 fell below M");
    assert!(
        report_out.linear_rel_err <= 1e-8,
        "linear column error {:.3e}",
        report_out.linear_rel_err
    );
    let column: Vec<f64> = report_out.rows.iter().map(|r| r.w_hs).collect();
    report(
        "criterion-10 illposedness-sequence",
        120.0,
        start.elapsed().as_secs_f64(),
        &format!("H² column {column:?}, linear err {:.2e}", report_out.linear_rel_err),
    );
}

/// Criterion 11: the geometric complex Burgers system is hyperbolic — real
/// characteristic roots for 10⁴ random points, coincident only at the
/// origin, and (0, 1) ↦ ±√3 to 1e-12.
#[test]
fn criterion_11_geometric_burgers_hyperbolicity() {
    let start = Instant::now();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let a: f64 = rng.gen_range(-10.0..10.0);
        let b: f64 = rng.gen_range(-10.0..10.0);
        let [l1, l2] = geometric_burgers_hyperbolicity(a, b);
        assert!(l1.is_finite() && l2.is_finite());
        for l in [l1, l2] {
            let res = l * l - 2.0 * a * l - 3.0 * (a * a + b * b);
            assert!(res.abs() <= 1e-10 * (1.0 + l * l), "root residual {res:.3e}");
        }
        if (a, b) != (0.0, 0.0) {
            // Gap 2√(4a²+3b²) ≥ 2√3·|(a,b)| > 0 away from the umbilical
            // point.
            assert!(l1 - l2 >= 2.0 * 3.0f64.sqrt() * (a * a + b * b).sqrt() * (1.0 - 1e-12));
        }
    }
    let sqrt3 = 3.0f64.sqrt();
    let [p1, p2] = geometric_burgers_hyperbolicity(0.0, 1.0);
    assert!((p1 - sqrt3).abs() <= 1e-12 && (p2 + sqrt3).abs() <= 1e-12);
    assert_eq!(geometric_burgers_hyperbolicity(0.0, 0.0), [0.0, 0.0]);
    report(
        "criterion-11 geometric-burgers-hyperbolicity",
        1.0,
        start.elapsed().as_secs_f64(),
        "10000 random points real and separated; reference values exact",
    );
}

/// Criterion 12: projection algebra and semigroup constants over
/// k ∈ [−32, 32] at the configured (γ, ν).
#[test]
fn criterion_12_projection_algebra_and_semigroup() {
    let start = Instant::now();
    let sys = LocalSystem::burgers();
    let lin = sys.linearization().unwrap();
    let params = ManifoldParams::burgers_defaults();
    for k in -32i64..=32 {
        let op = assemble_mode_operator(&lin, k, params.gamma).unwrap();
        let id = cxeuler::manifold::linalg::CMat::identity(2, 2);
        let e_sum = (&op.p_u + &op.p_cs - &id).norm();
        let e_idem = (&op.p_u * &op.p_u - &op.p_u).norm();
        let e_cross = (&op.p_u * &op.p_cs).norm();
        let e_comm = (&op.p_u * &op.matrix - &op.matrix * &op.p_u).norm();
        for (name, e) in
            [("sum", e_sum), ("idempotent", e_idem), ("cross", e_cross), ("commute", e_comm)]
        {
            assert!(e <= 1e-12 * (1.0 + op.matrix.norm()), "{name} defect {e:.3e} at k = {k}");
        }
    }
    let sg = semigroup_bound_check(&lin, params.gamma, params.nu, 32, 2.0, 17).unwrap();
    assert!(sg.c_u.is_finite() && sg.c_cs.is_finite());
    assert!(sg.c_u <= 1.0 + 1e-9 && sg.c_u >= 1.0 - 1e-12, "C_u = {}", sg.c_u);
    assert!(sg.c_cs <= 1.0 + 1e-9 && sg.c_cs >= 1.0 - 1e-12, "C_cs = {}", sg.c_cs);
    report(
        "criterion-12 projection-algebra-semigroup",
        10.0,
        start.elapsed().as_secs_f64(),
        &format!("C_u = {:.6}, C_cs = {:.6} over k in [-32, 32]", sg.c_u, sg.c_cs),
    );
}
