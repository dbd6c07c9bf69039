//! The ill-posedness sequence: single-eigenmode scattering data of fixed
//! `H^s` size at growing wavenumber produce solutions whose `H^s` norm at
//! any fixed negative time collapses to zero, while the time-zero data stay
//! of size `M`.

use super::picard::{scattering_solve, unstable_eigenmode};
use super::system::LocalSystem;
use super::trajectory::ManifoldParams;
use super::ManifoldError;
use crate::fourier::NormSpec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IllposedParams {
    /// Sobolev index `s > 1`.
    pub sobolev_s: f64,
    /// Evaluation time `t < 0`; must land on the solver grid.
    pub eval_time: f64,
    /// Target data size: `‖b₀‖_{H^s} = 2M` and the reported `a₀` must keep
    /// `‖a₀‖_{H^s} ≥ M`.
    pub m_target: f64,
    pub n_list: Vec<i64>,
}

impl Default for IllposedParams {
    fn default() -> Self {
        Self { sobolev_s: 2.0, eval_time: -0.5, m_target: 0.05, n_list: vec![4, 8, 16] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IllposedRow {
    pub n: i64,
    /// Leading eigenvalue rate `Re λ_n`.
    pub rate: f64,
    pub b0_a01: f64,
    pub b0_hs: f64,
    pub a0_a01: f64,
    pub a0_hs: f64,
    /// `‖w(·, t)‖_{H^s}` at the evaluation time.
    pub w_hs: f64,
    /// Measured `‖e^{tL} b₀‖_{H^s}` at the evaluation time.
    pub linear_hs: f64,
    /// Exact single-eigenmode value `e^{Re λ_n t}·2M`.
    pub linear_hs_predicted: f64,
    /// Set when the row could not be run within the smallness budget.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IllposedReport {
    pub params: IllposedParams,
    pub rows: Vec<IllposedRow>,
    /// `‖w(·,t)‖_{H^s}` strictly decreasing along the (run) rows.
    pub decreasing: bool,
    /// Every run row kept `‖a₀‖_{H^s} ≥ M`.
    pub a0_above_target: bool,
    /// Worst relative mismatch of the measured linear column against the
    /// exact decay.
    pub linear_rel_err: f64,
}

/// Run the sequence. Rows whose `H^s` normalization would violate the
/// `‖b₀‖_{A^{0,1}} ≤ ε₁` budget are skipped with a report, not an error.
pub fn illposedness_experiment(
    sys: &LocalSystem,
    params: &IllposedParams,
    base: &ManifoldParams,
) -> Result<IllposedReport, ManifoldError> {
    if params.sobolev_s <= 1.0 {
        return Err(ManifoldError::InvalidParams(format!(
            "the sequence needs s > 1, got {}",
            params.sobolev_s
        )));
    }
    if !(params.eval_time < 0.0) {
        return Err(ManifoldError::InvalidParams(format!(
            "evaluation time must be negative, got {}",
            params.eval_time
        )));
    }
    if !(params.m_target > 0.0) {
        return Err(ManifoldError::InvalidParams("m_target must be positive".into()));
    }
    let lin = sys.linearization()?;
    let s = params.sobolev_s;
    let two_m = 2.0 * params.m_target;
    let hs_spec = NormSpec::sobolev(s)?;
    let a01 = NormSpec::a01();

    let mut rows = Vec::new();
    for &n in &params.n_list {
        let (unit, lambda) = unstable_eigenmode(&lin, n)?;
        // Unit field has ‖·‖_{A^{0,1}} = 1; rescale to ‖·‖_{H^s} = 2M.
        let hs_unit = unit.norm(&hs_spec);
        let scale = two_m / hs_unit;
        let b0 = unit.scaled(Complex64::new(scale, 0.0));
        let b0_a01 = b0.norm(&a01);
        let b0_hs = b0.norm(&hs_spec);
        if b0_a01 > base.eps1 {
            rows.push(IllposedRow {
                n,
                rate: lambda.re,
                b0_a01,
                b0_hs,
                a0_a01: f64::NAN,
                a0_hs: f64::NAN,
                w_hs: f64::NAN,
                linear_hs: f64::NAN,
                linear_hs_predicted: f64::NAN,
                skipped: Some(format!(
                    "‖b0‖_A^{{0,1}} = {b0_a01:.3e} exceeds eps1 = {:.3e} at this M",
                    base.eps1
                )),
            });
            continue;
        }
        let sol = scattering_solve(sys, &b0, base)?;
        let node = sol.trajectory.node_at_time(params.eval_time).ok_or_else(|| {
            ManifoldError::InvalidParams(format!(
                "evaluation time {} does not land on the grid (step {})",
                params.eval_time,
                sol.trajectory.step_size()
            ))
        })?;
        rows.push(IllposedRow {
            n,
            rate: lambda.re,
            b0_a01,
            b0_hs,
            a0_a01: sol.a0.norm(&a01),
            a0_hs: sol.a0.norm(&hs_spec),
            w_hs: sol.trajectory.hs_norm_at(node, s),
            linear_hs: sol.linear.hs_norm_at(node, s),
            linear_hs_predicted: (lambda.re * params.eval_time).exp() * two_m,
            skipped: None,
        });
    }

    let run: Vec<&IllposedRow> = rows.iter().filter(|r| r.skipped.is_none()).collect();
    let decreasing = run.windows(2).all(|w| w[1].w_hs < w[0].w_hs);
    let a0_above_target = run.iter().all(|r| r.a0_hs >= params.m_target);
    let linear_rel_err = run
        .iter()
        .map(|r| (r.linear_hs - r.linear_hs_predicted).abs() / r.linear_hs_predicted)
        .fold(0.0f64, f64::max);
    Ok(IllposedReport { params: params.clone(), rows, decreasing, a0_above_target, linear_rel_err })
}
