//! Infinite-dimensional unstable manifolds for non-hyperbolic first-order
//! systems `∂_t u + F(u, ∂_x u) = 0`.
//!
//! Near a constant equilibrium the perturbation solves
//! `∂_t w − Lw = F̃(w, ∂_x w)` with `L_k = L₀ + k𝐋` on the `k`-th Fourier
//! mode. When `𝐋` is hyperbolic, `L` has an infinite-dimensional unstable
//! spectrum growing linearly in `k`; backward-in-time trajectories decaying
//! at rate `γ` and parametrized by the unstable part of their time-zero
//! trace form the unstable manifold. This module builds that object
//! numerically:
//!
//! - per-mode operators with dichotomy projections and eigenvalue-group
//!   bookkeeping ([`assemble_mode_operator`], [`eigenvalue_groups`],
//!   [`modified_projection`]);
//! - measured semigroup smoothing/decay constants
//!   ([`semigroup_bound_check`]);
//! - the Duhamel fixed point for unstable data ([`picard_solve`]) and for
//!   single-mode scattering data ([`scattering_solve`]);
//! - the ill-posedness sequence at fixed Sobolev size
//!   ([`illposedness_experiment`]).
//!
//! The canonical instance is the complex Burgers equation
//! `∂_t u + 3u∂_x u = 0` at `u ≡ i`, embedded as a real 2-system
//! ([`LocalSystem::burgers`]); its transport matrix has eigenvalues `±3`, so
//! mode `k` carries one exponential rate `+3|k|` and the instability is
//! unbounded in frequency.
//!
//! ```
//! use cxeuler::manifold::{assemble_mode_operator, LocalSystem};
//!
//! let sys = LocalSystem::burgers();
//! let lin = sys.linearization().unwrap();
//! // L₂ = 2𝐋 has eigenvalues ±6; one unstable direction at γ = 1.
//! let op = assemble_mode_operator(&lin, 2, 1.0).unwrap();
//! let mut rates: Vec<f64> = op.eigenvalues.iter().map(|l| l.re).collect();
//! rates.sort_by(f64::total_cmp);
//! assert!((rates[0] + 6.0).abs() < 1e-12 && (rates[1] - 6.0).abs() < 1e-12);
//! assert_eq!(op.unstable_count, 1);
//! ```

mod illposed;
pub mod linalg;
mod modes;
mod nonlinear;
mod picard;
mod system;
mod trajectory;

pub use illposed::{illposedness_experiment, IllposedParams, IllposedReport, IllposedRow};
pub use modes::{
    assemble_mode_operator, assemble_with_axis_tol, eigenvalue_groups, modified_projection,
    semigroup_bound_check, EigenvalueGroups, ModeOperator, ModifiedSplit, SemigroupReport,
    DEFAULT_AXIS_TOL, EIGENBASIS_COND_LIMIT,
};
pub use nonlinear::nonlinear_eval;
pub use picard::{
    calibrate_eps, min_positive_rate, pde_residual, picard_solve, picard_solve_from,
    scattering_solve, unstable_eigenmode, InitialIterate, PicardSolution, ScatteringSolution,
};
pub use system::{geometric_burgers_hyperbolicity, Linearization, LocalSystem, TaylorTerm};
pub use trajectory::{ManifoldParams, WeightedTrajectory};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifoldError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("transport matrix is not hyperbolic: eigenvalue {mu} on the imaginary axis")]
    NotHyperbolic { mu: Complex64 },
    #[error("Taylor term of total degree {degree} < 2: the remainder must vanish to second order")]
    LowOrderTaylorTerm { degree: u32 },
    #[error("eigenvalue {lambda} of mode {k} within tolerance of the threshold Re λ = {gamma}; perturb gamma")]
    ThresholdOnSpectrum { k: i64, gamma: f64, lambda: Complex64 },
    #[error("wavenumber {k} below the grouping cutoff: {reason}")]
    BelowGroupCutoff { k: i64, reason: String },
    #[error("smoothing rate nu = {nu} too large for this system (measured constants {c_u:.3e}, {c_cs:.3e} diverge along k)")]
    NuTooLarge { nu: f64, c_u: f64, c_cs: f64 },
    #[error("gamma = {gamma} outside the admissible range ({context}; bound {bound})")]
    GammaOutOfRange { gamma: f64, bound: f64, context: &'static str },
    #[error("datum {name} too large: ‖·‖ = {norm:.6e} exceeds {limit:.6e}")]
    DataTooLarge { norm: f64, limit: f64, name: &'static str },
    #[error("datum not in the {subspace} subspace at mode {k} (defect {defect:.3e})")]
    NotInSubspace { k: i64, defect: f64, subspace: &'static str },
    #[error("nonlinearity evaluated outside the analyticity ball: size {size:.3e} > ρ/4 = {quarter_rho:.3e}")]
    OutsideAnalyticityBall { size: f64, quarter_rho: f64 },
    #[error("no contraction at these parameters: after {iterations} iterations the update is {delta:.3e}")]
    NoContraction { iterations: usize, delta: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FourierField;
    use num_complex::Complex64;

    /// Small, fast parameter set for unit tests (coarser grid than the
    /// defaults; the acceptance suite runs the full configuration).
    fn test_params() -> ManifoldParams {
        ManifoldParams { cutoff: 8, n_steps: 160, t_span: 14.0 / 1.5, ..ManifoldParams::burgers_defaults() }
    }

    #[test]
    fn zero_datum_fixed_point_is_zero() {
        let sys = LocalSystem::burgers();
        let a0 = FourierField::new(1, 1, 2).unwrap();
        let sol = picard_solve(&sys, &a0, &test_params()).unwrap();
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.trajectory.weighted_norm(), 0.0);
        assert_eq!(sol.residual, 0.0);
    }

    #[test]
    fn picard_converges_on_small_unstable_datum() {
        let sys = LocalSystem::burgers();
        let lin = sys.linearization().unwrap();
        let (unit, lambda) = unstable_eigenmode(&lin, 1).unwrap();
        assert!((lambda - Complex64::new(3.0, 0.0)).norm() < 1e-12);
        let a0 = unit.scaled(Complex64::new(1e-3, 0.0));
        let sol = picard_solve(&sys, &a0, &test_params()).unwrap();
        assert!(sol.iterations <= 30);
        assert!(sol.residual <= 1e-10);
        assert!(sol.contraction.iter().all(|&c| c <= 0.5));
        assert!(sol.pu_w0_defect < 1e-12);
        assert!(sol.bound_constant.is_finite() && sol.bound_constant > 0.0);
        // The datum sits at t = 0 with weight 1, so the trajectory norm is
        // at least ‖a0‖.
        assert!(sol.bound_constant >= 1.0 - 1e-9);
    }

    #[test]
    fn oversized_datum_is_rejected() {
        let sys = LocalSystem::burgers();
        let lin = sys.linearization().unwrap();
        let (unit, _) = unstable_eigenmode(&lin, 1).unwrap();
        let a0 = unit.scaled(Complex64::new(1.0, 0.0));
        assert!(matches!(
            picard_solve(&sys, &a0, &test_params()),
            Err(ManifoldError::DataTooLarge { name: "a0", .. })
        ));
    }

    #[test]
    fn stable_datum_is_rejected() {
        // The k = 1 eigenmode of the stable eigenvalue −3 is not in E^u.
        let sys = LocalSystem::burgers();
        let mut a0 = FourierField::new(1, 2, 2).unwrap();
        // v⁻ = (1, i)/√2 direction for λ = −3.
        let c = Complex64::new(1e-3, 0.0);
        a0.set([1, 0], vec![c, Complex64::new(0.0, 1.0) * c]).unwrap();
        assert!(matches!(
            picard_solve(&sys, &a0, &test_params()),
            Err(ManifoldError::NotInSubspace { .. })
        ));
    }

    #[test]
    fn gamma_hypothesis_is_enforced() {
        let sys = LocalSystem::burgers();
        let lin = sys.linearization().unwrap();
        let (unit, _) = unstable_eigenmode(&lin, 1).unwrap();
        let a0 = unit.scaled(Complex64::new(1e-3, 0.0));
        let mut p = test_params();
        p.gamma = 2.0; // above m0/2 = 1.5
        assert!(matches!(
            picard_solve(&sys, &a0, &p),
            Err(ManifoldError::GammaOutOfRange { .. })
        ));
    }

    #[test]
    fn zero_scattering_datum_gives_zero() {
        let sys = LocalSystem::burgers();
        let b0 = FourierField::new(1, 1, 2).unwrap();
        let sol = scattering_solve(&sys, &b0, &test_params()).unwrap();
        assert_eq!(sol.trajectory.weighted_norm(), 0.0);
        assert_eq!(sol.deviation_norm, 0.0);
    }

    #[test]
    fn pde_residual_of_picard_fixed_point() {
        // Independent oracle: 4th-order finite differences in t of the
        // converged trajectory must satisfy ∂_t w = Lw + F̃(w, ∂_x w). The
        // residual is dominated by the stencil term (λh)⁴/30 of the oracle
        // itself; on this coarse grid (h ≈ 0.058, λ = 3) that is ≈ 3·10⁻⁵.
        // The acceptance suite checks ≤ 10⁻⁶ on the production grid.
        let sys = LocalSystem::burgers();
        let lin = sys.linearization().unwrap();
        let (unit, _) = unstable_eigenmode(&lin, 1).unwrap();
        let a0 = unit.scaled(Complex64::new(1e-3, 0.0));
        let params = test_params();
        let sol = picard_solve(&sys, &a0, &params).unwrap();
        let rel = pde_residual(&sys, &sol.trajectory).unwrap();
        assert!(rel <= 1e-4, "relative PDE residual {rel}");
    }

    #[test]
    fn scattering_quadratic_ratio_is_stable_under_halving() {
        let sys = LocalSystem::burgers();
        let lin = sys.linearization().unwrap();
        let (unit, _) = unstable_eigenmode(&lin, 2).unwrap();
        let params = test_params();
        let base = 8e-3;
        let r1 = scattering_solve(&sys, &unit.scaled(Complex64::new(base, 0.0)), &params)
            .unwrap();
        let r2 = scattering_solve(&sys, &unit.scaled(Complex64::new(base / 2.0, 0.0)), &params)
            .unwrap();
        let exponent = (r1.deviation_norm / r2.deviation_norm).log2();
        assert!((exponent - 2.0).abs() <= 0.1, "measured exponent {exponent}");
    }

    #[test]
    fn uniqueness_at_zero_radius_growth() {
        // ζ = 0: two starting iterates land on the same fixed point.
        let sys = LocalSystem::burgers();
        let lin = sys.linearization().unwrap();
        let (unit, _) = unstable_eigenmode(&lin, 1).unwrap();
        let a0 = unit.scaled(Complex64::new(1e-3, 0.0));
        let mut params = test_params();
        params.zeta = 0.0;
        let from_zero =
            picard_solve_from(&sys, &a0, &params, InitialIterate::Zero).unwrap();
        let from_lin =
            picard_solve_from(&sys, &a0, &params, InitialIterate::LinearFlow).unwrap();
        let diff = from_zero
            .trajectory
            .weighted_distance_to(Some(&from_lin.trajectory));
        assert!(diff <= 1e-9, "fixed points differ by {diff}");
    }

    #[test]
    fn illposed_sequence_on_coarse_grid() {
        let sys = LocalSystem::burgers();
        // h = 1/18 keeps the evaluation time −0.5 on the grid.
        let base = ManifoldParams { cutoff: 16, n_steps: 168, ..test_params() };
        let ip = IllposedParams { n_list: vec![2, 4], m_target: 0.02, ..Default::default() };
        let report = illposedness_experiment(&sys, &ip, &base).unwrap();
        assert!(report.rows.iter().all(|r| r.skipped.is_none()));
        assert!(report.decreasing);
        assert!(report.a0_above_target);
        assert!(report.linear_rel_err < 1e-8, "linear column err {}", report.linear_rel_err);
    }

    #[test]
    fn exponential_integral_inequalities_discrete() {
        // The discrete quadrature operators obey the continuum
        // exponential-integral bounds up to O(h²). Forward, for d < b:
        //   e^{(b+ζ|k|)|t|} |∫_{−∞}^t e^{(d−ν|k|)(t−s)} f(s) ds|
        //     ≤ [(b−d) + (ν−ζ)|k|]^{-1} · sup_s e^{(b+ζ|k|)|s|}|f(s)| ,
        // and the mirrored version over ∫_t^0 with rate d+ν|k| for d > b.
        use linalg::{phi1_scalar, phi2_scalar};
        let params = test_params();
        let h = params.t_span / params.n_steps as f64;
        let times: Vec<f64> =
            (0..=params.n_steps).map(|n| -params.t_span + h * n as f64).collect();
        let n_nodes = times.len();
        let (b, zeta, nu) = (1.5f64, 0.5f64, 1.0f64);
        let quad = |z: f64| -> (f64, f64, f64) {
            let zc = Complex64::new(z, 0.0);
            (
                z.exp(),
                h * phi2_scalar(zc).re,
                h * (phi1_scalar(zc) - phi2_scalar(zc)).re,
            )
        };
        for &k in &[1.0f64, 4.0, 8.0] {
            // Weighted-unit sample: f(s) = e^{(b+ζk)s}, so the weighted sup
            // equals 1 (attained at s = 0).
            let f_at = |t: f64| ((b + zeta * k) * t).exp();

            // Forward channel, d = 0.3 < b, kernel rate d − νk.
            let d = 0.3;
            let (step, wn, wf) = quad((d - nu * k) * h);
            let denom = (b - d) + (nu - zeta) * k;
            let mut state = 0.0f64;
            let mut worst = 0.0f64;
            for n in 1..n_nodes {
                state = step * state + wn * f_at(times[n]) + wf * f_at(times[n - 1]);
                worst = worst.max(((b + zeta * k) * times[n].abs()).exp() * state * denom);
            }
            assert!(worst <= 1.0 + 10.0 * h * h, "forward bound at k = {k}: ratio {worst}");

            // Backward channel, d = 2.5 > b, kernel rate d + νk over [t, 0].
            let d = 2.5;
            let (step, wn, wf) = quad(-(d + nu * k) * h);
            let denom = (d - b) + (nu - zeta) * k;
            let mut state = 0.0f64;
            let mut worst = 0.0f64;
            for n in (0..n_nodes - 1).rev() {
                state = step * state + wn * f_at(times[n]) + wf * f_at(times[n + 1]);
                worst = worst.max(((b + zeta * k) * times[n].abs()).exp() * state * denom);
            }
            assert!(worst <= 1.0 + 10.0 * h * h, "backward bound at k = {k}: ratio {worst}");
        }
    }
}
