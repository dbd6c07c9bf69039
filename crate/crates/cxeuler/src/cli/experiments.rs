//! Per-experiment parameter resolution, validation, and dispatch.

use super::{write_artifact, CliError, CriterionResult, RunConfig, RunSummary};
use crate::euler2d::{self, ConserveParams, GrowthParams};
use crate::manifold::{self, IllposedParams, LocalSystem, ManifoldParams};
use crate::shear::{self, AnalyticityParams, InflationParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::Path;

/// The recognized experiment names.
pub const EXPERIMENT_NAMES: [&str; 8] = [
    "shear-inflation",
    "shear-analyticity",
    "euler2d-conserve",
    "euler2d-growth",
    "manifold-picard",
    "manifold-scatter",
    "manifold-illposed",
    "burgers-hyperbolic",
];

/// Overlay the user's fields on top of the serialized defaults, rejecting
/// unknown keys.
fn resolve_params<T: Serialize + DeserializeOwned>(base: T, user: &Value) -> Result<T, CliError> {
    let mut merged = serde_json::to_value(&base).expect("defaults serialize");
    if !user.is_null() {
        let overrides = user.as_object().ok_or_else(|| {
            CliError::ConfigParse("params must be a JSON object".into())
        })?;
        let target = merged.as_object_mut().expect("defaults are an object");
        for (key, value) in overrides {
            if !target.contains_key(key) {
                return Err(CliError::InvalidParam {
                    field: key.clone(),
                    message: format!(
                        "unknown field; known: {}",
                        target.keys().cloned().collect::<Vec<_>>().join(", ")
                    ),
                });
            }
            target.insert(key.clone(), value.clone());
        }
    }
    serde_json::from_value(merged).map_err(|e| CliError::ConfigParse(e.to_string()))
}

/// Knobs of the manifold experiments: the datum plus overrides of
/// [`ManifoldParams::burgers_defaults`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PicardCliParams {
    pub a0_mode: i64,
    pub a0_norm: f64,
    #[serde(flatten)]
    pub base: ManifoldParams,
}

impl Default for PicardCliParams {
    fn default() -> Self {
        Self { a0_mode: 1, a0_norm: 1e-3, base: ManifoldParams::burgers_defaults() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatterCliParams {
    pub b0_mode: i64,
    pub b0_norm: f64,
    pub halvings: u32,
    pub exponent_tol: f64,
    #[serde(flatten)]
    pub base: ManifoldParams,
}

impl Default for ScatterCliParams {
    fn default() -> Self {
        Self {
            b0_mode: 4,
            b0_norm: 0.02,
            halvings: 3,
            exponent_tol: 0.1,
            base: ManifoldParams::burgers_defaults(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IllposedCliParams {
    #[serde(flatten)]
    pub seq: IllposedParams,
    #[serde(flatten)]
    pub base: ManifoldParams,
}

impl Default for IllposedCliParams {
    fn default() -> Self {
        Self { seq: IllposedParams::default(), base: ManifoldParams::burgers_defaults() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperbolicCliParams {
    pub samples: usize,
    pub range: f64,
}

impl Default for HyperbolicCliParams {
    fn default() -> Self {
        Self { samples: 10_000, range: 10.0 }
    }
}

fn positive(issues: &mut Vec<String>, name: &str, v: f64) {
    if !(v > 0.0) || !v.is_finite() {
        issues.push(format!("{name} must be positive, got {v}"));
    }
}

/// Cheap precondition checks per experiment; returns human-readable issues.
pub fn validate_params(config: &RunConfig) -> Result<Vec<String>, CliError> {
    let mut issues = Vec::new();
    match config.experiment.as_str() {
        "shear-inflation" => {
            let p: InflationParams = resolve_params(InflationParams::default(), &config.params)?;
            positive(&mut issues, "eps", p.eps);
            positive(&mut issues, "m_target", p.m_target);
            positive(&mut issues, "t_max", p.t_max);
            positive(&mut issues, "dt", p.dt);
            if p.s < 0.0 {
                issues.push(format!("s must be nonnegative, got {}", p.s));
            }
        }
        "shear-analyticity" => {
            let p: AnalyticityParams =
                resolve_params(AnalyticityParams::default(), &config.params)?;
            positive(&mut issues, "q_in", p.q_in);
            positive(&mut issues, "t_end", p.t_end);
            positive(&mut issues, "dt", p.dt);
            if !(p.decay_exponent > 0.5 && p.decay_exponent <= 1.0) {
                issues.push(format!(
                    "decay_exponent must lie in (1/2, 1], got {}",
                    p.decay_exponent
                ));
            }
            if p.cutoff < 4 {
                issues.push(format!("cutoff must be at least 4, got {}", p.cutoff));
            }
        }
        "euler2d-conserve" => {
            let p: ConserveParams = resolve_params(ConserveParams::default(), &config.params)?;
            positive(&mut issues, "dt", p.dt);
            positive(&mut issues, "t_end", p.t_end);
            positive(&mut issues, "tol", p.tol);
            if p.cutoff < 4 {
                issues.push(format!("cutoff must be at least 4, got {}", p.cutoff));
            }
            if p.active_modes <= 0 || p.active_modes as u32 > p.cutoff {
                issues.push(format!(
                    "active_modes must lie in [1, cutoff], got {}",
                    p.active_modes
                ));
            }
        }
        "euler2d-growth" => {
            let p: GrowthParams = resolve_params(GrowthParams::default(), &config.params)?;
            positive(&mut issues, "dt", p.dt);
            positive(&mut issues, "t_end", p.t_end);
            let a_abs = (p.background_re[0].powi(2)
                + p.background_re[1].powi(2)
                + p.background_im[0].powi(2)
                + p.background_im[1].powi(2))
            .sqrt();
            if !(p.delta > 0.0 && p.delta < 0.1 * a_abs) {
                issues.push(format!(
                    "delta must be positive and small against |a| = {a_abs}, got {}",
                    p.delta
                ));
            }
            let kmax = p.mode[0].abs().max(p.mode[1].abs()) as u32;
            if p.cutoff < 4 * kmax {
                issues.push(format!("cutoff must be at least 4·|k|_∞ = {}", 4 * kmax));
            }
        }
        "manifold-picard" => {
            let p: PicardCliParams = resolve_params(PicardCliParams::default(), &config.params)?;
            if let Err(e) = p.base.validate() {
                issues.push(e.to_string());
            }
            positive(&mut issues, "a0_norm", p.a0_norm);
            if p.a0_norm > p.base.eps0 {
                issues.push(format!(
                    "a0_norm = {} exceeds eps0 = {}: the contraction is only guaranteed on the small ball",
                    p.a0_norm, p.base.eps0
                ));
            }
            if p.base.gamma > p.base.m0 / 2.0 + 1e-12 {
                issues.push(format!(
                    "gamma = {} violates the manifold hypothesis 0 < gamma <= m0/2 = {}",
                    p.base.gamma,
                    p.base.m0 / 2.0
                ));
            }
            if p.a0_mode == 0 {
                issues.push("a0_mode must be nonzero (mode zero carries no instability)".into());
            }
        }
        "manifold-scatter" => {
            let p: ScatterCliParams =
                resolve_params(ScatterCliParams::default(), &config.params)?;
            if let Err(e) = p.base.validate() {
                issues.push(e.to_string());
            }
            positive(&mut issues, "b0_norm", p.b0_norm);
            if p.b0_norm > p.base.eps1 {
                issues.push(format!(
                    "b0_norm = {} exceeds eps1 = {}",
                    p.b0_norm, p.base.eps1
                ));
            }
            if p.base.gamma < p.base.m0 / 2.0 - 1e-12 {
                issues.push(format!(
                    "gamma = {} violates the scattering hypothesis gamma >= m0/2 = {}",
                    p.base.gamma,
                    p.base.m0 / 2.0
                ));
            }
            if p.b0_mode == 0 {
                issues.push("b0_mode must be nonzero".into());
            }
        }
        "manifold-illposed" => {
            let p: IllposedCliParams =
                resolve_params(IllposedCliParams::default(), &config.params)?;
            if let Err(e) = p.base.validate() {
                issues.push(e.to_string());
            }
            if p.seq.sobolev_s <= 1.0 {
                issues.push(format!("sobolev_s must exceed 1, got {}", p.seq.sobolev_s));
            }
            if !(p.seq.eval_time < 0.0) {
                issues.push(format!("eval_time must be negative, got {}", p.seq.eval_time));
            }
            positive(&mut issues, "m_target", p.seq.m_target);
            if p.seq.n_list.is_empty() {
                issues.push("n_list must be nonempty".into());
            }
        }
        "burgers-hyperbolic" => {
            let p: HyperbolicCliParams =
                resolve_params(HyperbolicCliParams::default(), &config.params)?;
            if p.samples == 0 {
                issues.push("samples must be positive".into());
            }
            positive(&mut issues, "range", p.range);
        }
        other => {
            return Err(CliError::UnknownExperiment {
                name: other.into(),
                known: EXPERIMENT_NAMES.join(", "),
            })
        }
    }
    Ok(issues)
}

fn csv_from_rows(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("csv");
    for row in rows {
        w.write_record(&row).expect("csv");
    }
    w.into_inner().expect("csv buffer")
}

fn f(x: f64) -> String {
    format!("{x:.17e}")
}

fn experiment_err(e: impl std::fmt::Display) -> CliError {
    CliError::Experiment(e.to_string())
}

/// Run the experiment and assemble the summary (criteria unset-pass field is
/// filled by the caller).
pub fn dispatch(config: &RunConfig, out_dir: &Path) -> Result<RunSummary, CliError> {
    let mut artifacts = Vec::new();
    let (params_json, criteria, measured): (Value, Vec<CriterionResult>, Value) =
        match config.experiment.as_str() {
            "shear-inflation" => {
                let p: InflationParams =
                    resolve_params(InflationParams::default(), &config.params)?;
                let out = shear::norm_inflation_experiment(&p).map_err(experiment_err)?;
                let csv = csv_from_rows(
                    &["t", "q", "E", "hs_norm"],
                    out.trace.iter().map(|s| vec![f(s.t), f(s.q), f(s.energy), f(s.hs)]),
                );
                artifacts.push(write_artifact(out_dir, "inflation_trace.csv", &csv)?);
                let runs_csv = csv_from_rows(
                    &["k", "t_cross", "achieved_sup"],
                    out.runs.iter().map(|r| {
                        vec![
                            r.k.to_string(),
                            r.t_cross.map(f).unwrap_or_default(),
                            f(r.achieved_sup),
                        ]
                    }),
                );
                artifacts.push(write_artifact(out_dir, "inflation_doublings.csv", &runs_csv)?);
                let criteria = vec![
                    CriterionResult::le(
                        "initial_hs_below_eps",
                        out.initial_hs,
                        p.eps,
                    ),
                    CriterionResult::le(
                        "crossing_within_margin",
                        out.t0.unwrap_or(f64::INFINITY),
                        p.margin * out.predicted_t0,
                    ),
                    CriterionResult::boolean("doubling_monotone", out.doubling_monotone()),
                ];
                let measured = serde_json::json!({
                    "k_used": out.k_used,
                    "t0": out.t0,
                    "predicted_t0": out.predicted_t0,
                    "initial_hs": out.initial_hs,
                    "doublings": out.runs.iter().map(|r| (r.k, r.t_cross)).collect::<Vec<_>>(),
                });
                (serde_json::to_value(&p).unwrap(), criteria, measured)
            }
            "shear-analyticity" => {
                let p: AnalyticityParams =
                    resolve_params(AnalyticityParams::default(), &config.params)?;
                let out = shear::loss_of_analyticity_experiment(&p).map_err(experiment_err)?;
                let csv = csv_from_rows(
                    &["t", "q", "E", "radius", "integral_q"],
                    out.samples
                        .iter()
                        .map(|s| vec![f(s.t), f(s.q), f(s.energy), f(s.radius), f(s.integral_q)]),
                );
                artifacts.push(write_artifact(out_dir, "analyticity_trace.csv", &csv)?);
                let criteria = vec![
                    CriterionResult::le("radius_rel_err_late_half", out.max_rel_radius_err, p.rel_tol),
                    CriterionResult::boolean("q_monotone", out.q_monotone),
                    CriterionResult::le("energy_drift", out.max_energy_drift, 1e-10),
                ];
                let measured = serde_json::json!({
                    "fitted_slope": out.fitted_slope,
                    "max_rel_radius_err": out.max_rel_radius_err,
                    "max_energy_drift": out.max_energy_drift,
                });
                (serde_json::to_value(&p).unwrap(), criteria, measured)
            }
            "euler2d-conserve" => {
                let mut p: ConserveParams =
                    resolve_params(ConserveParams::default(), &config.params)?;
                p.seed = config.seed;
                let out = euler2d::conservation_experiment(&p).map_err(experiment_err)?;
                let csv = csv_from_rows(
                    &["t", "energy", "enstrophy_re", "enstrophy_im", "casimir3_re", "casimir3_im", "mean_re_1", "mean_re_2"],
                    out.samples.iter().map(|s| {
                        vec![
                            f(s.t),
                            f(s.energy),
                            f(s.enstrophy_re),
                            f(s.enstrophy_im),
                            f(s.casimir3_re),
                            f(s.casimir3_im),
                            f(s.mean_re[0]),
                            f(s.mean_re[1]),
                        ]
                    }),
                );
                artifacts.push(write_artifact(out_dir, "conservation_trace.csv", &csv)?);
                let names = ["energy_drift", "enstrophy_drift", "casimir3_drift", "mean_re_drift"];
                let criteria = names
                    .iter()
                    .zip(out.max_rel_drift)
                    .map(|(n, v)| CriterionResult::le(*n, v, p.tol))
                    .collect();
                let measured = serde_json::json!({ "max_rel_drift": out.max_rel_drift });
                (serde_json::to_value(&p).unwrap(), criteria, measured)
            }
            "euler2d-growth" => {
                let p: GrowthParams = resolve_params(GrowthParams::default(), &config.params)?;
                let out = euler2d::linear_growth_check(&p).map_err(experiment_err)?;
                let csv = csv_from_rows(
                    &["t", "log_amp"],
                    out.samples.iter().map(|&(t, a)| vec![f(t), f(a)]),
                );
                artifacts.push(write_artifact(out_dir, "growth_trace.csv", &csv)?);
                let criteria = vec![CriterionResult::le(
                    "rate_error",
                    (out.measured_rate - out.predicted_rate).abs(),
                    out.tolerance,
                )];
                let measured = serde_json::json!({
                    "measured_rate": out.measured_rate,
                    "predicted_rate": out.predicted_rate,
                    "growth_factor": out.growth_factor,
                });
                (serde_json::to_value(&p).unwrap(), criteria, measured)
            }
            "manifold-picard" => {
                let p: PicardCliParams =
                    resolve_params(PicardCliParams::default(), &config.params)?;
                let sys = LocalSystem::burgers();
                let lin = sys.linearization().map_err(experiment_err)?;
                let (unit, lambda) =
                    manifold::unstable_eigenmode(&lin, p.a0_mode).map_err(experiment_err)?;
                let a0 = unit.scaled(Complex64::new(p.a0_norm, 0.0));
                let sol = manifold::picard_solve(&sys, &a0, &p.base).map_err(experiment_err)?;
                let pde = manifold::pde_residual(&sys, &sol.trajectory).map_err(experiment_err)?;
                let mut buf = Vec::new();
                sol.trajectory.write_csv(&mut buf).map_err(|e| CliError::Experiment(e.to_string()))?;
                artifacts.push(write_artifact(out_dir, "picard_trajectory.csv", &buf)?);
                let worst_contraction =
                    sol.contraction.iter().copied().fold(0.0f64, f64::max);
                let criteria = vec![
                    CriterionResult::le("iterations", sol.iterations as f64, p.base.picard_max_iters as f64),
                    CriterionResult::le("residual", sol.residual, p.base.picard_tol),
                    CriterionResult::le("contraction_factor", worst_contraction, 0.5),
                    CriterionResult::le("pde_residual", pde, 1e-6),
                    CriterionResult::le("pu_w0_defect", sol.pu_w0_defect, 1e-12),
                ];
                let measured = serde_json::json!({
                    "bound_constant": sol.bound_constant,
                    "a0_norm": sol.a0_norm,
                    "eigenvalue": [lambda.re, lambda.im],
                    "tail_bound": sol.tail_bound,
                    "measured_m0": sol.measured_m0,
                    "iterations": sol.iterations,
                });
                (serde_json::to_value(&p).unwrap(), criteria, measured)
            }
            "manifold-scatter" => {
                let p: ScatterCliParams =
                    resolve_params(ScatterCliParams::default(), &config.params)?;
                let sys = LocalSystem::burgers();
                let lin = sys.linearization().map_err(experiment_err)?;
                let (unit, _) =
                    manifold::unstable_eigenmode(&lin, p.b0_mode).map_err(experiment_err)?;
                let mut rows = Vec::new();
                let mut norms = Vec::new();
                for level in 0..=p.halvings {
                    let b0 = unit.scaled(Complex64::new(
                        p.b0_norm * 0.5f64.powi(level as i32),
                        0.0,
                    ));
                    let sol =
                        manifold::scattering_solve(&sys, &b0, &p.base).map_err(experiment_err)?;
                    rows.push(vec![
                        level.to_string(),
                        f(sol.b0_norm),
                        f(sol.deviation_norm),
                        f(sol.quadratic_ratio),
                        sol.iterations.to_string(),
                        f(sol.residual),
                    ]);
                    norms.push(sol.deviation_norm);
                }
                let csv = csv_from_rows(
                    &["level", "b0_norm", "deviation_norm", "quadratic_ratio", "iterations", "residual"],
                    rows.into_iter(),
                );
                artifacts.push(write_artifact(out_dir, "scatter_halvings.csv", &csv)?);
                let exponents: Vec<f64> =
                    norms.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
                let worst = exponents
                    .iter()
                    .map(|e| (e - 2.0).abs())
                    .fold(0.0f64, f64::max);
                let criteria = vec![CriterionResult::le(
                    "quadratic_exponent_deviation",
                    worst,
                    p.exponent_tol,
                )];
                let measured = serde_json::json!({
                    "exponents": exponents,
                    "deviation_norms": norms,
                });
                (serde_json::to_value(&p).unwrap(), criteria, measured)
            }
            "manifold-illposed" => {
                let p: IllposedCliParams =
                    resolve_params(IllposedCliParams::default(), &config.params)?;
                let sys = LocalSystem::burgers();
                let report = manifold::illposedness_experiment(&sys, &p.seq, &p.base)
                    .map_err(experiment_err)?;
                let csv = csv_from_rows(
                    &["n", "rate", "b0_a01", "b0_hs", "a0_a01", "a0_hs", "w_hs", "linear_hs", "linear_hs_predicted", "skipped"],
                    report.rows.iter().map(|r| {
                        vec![
                            r.n.to_string(),
                            f(r.rate),
                            f(r.b0_a01),
                            f(r.b0_hs),
                            f(r.a0_a01),
                            f(r.a0_hs),
                            f(r.w_hs),
                            f(r.linear_hs),
                            f(r.linear_hs_predicted),
                            r.skipped.clone().unwrap_or_default(),
                        ]
                    }),
                );
                artifacts.push(write_artifact(out_dir, "illposed_sequence.csv", &csv)?);
                let criteria = vec![
                    CriterionResult::boolean("hs_strictly_decreasing", report.decreasing),
                    CriterionResult::boolean("a0_hs_above_target", report.a0_above_target),
                    CriterionResult::le("linear_column_rel_err", report.linear_rel_err, 1e-8),
                ];
                let measured = serde_json::json!({
                    "rows": report.rows,
                });
                (serde_json::to_value(&p).unwrap(), criteria, measured)
            }
            "burgers-hyperbolic" => {
                let p: HyperbolicCliParams =
                    resolve_params(HyperbolicCliParams::default(), &config.params)?;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
                let mut worst_residual = 0.0f64;
                let mut min_gap_scaled = f64::INFINITY;
                let mut rows = Vec::new();
                for i in 0..p.samples {
                    let a = rng.gen_range(-p.range..p.range);
                    let b = rng.gen_range(-p.range..p.range);
                    let [l1, l2] = manifold::geometric_burgers_hyperbolicity(a, b);
                    for l in [l1, l2] {
                        let res = (l * l - 2.0 * a * l - 3.0 * (a * a + b * b)).abs();
                        worst_residual = worst_residual.max(res / (1.0 + l * l));
                    }
                    let scale = (a * a + b * b).sqrt();
                    if scale > 0.0 {
                        min_gap_scaled = min_gap_scaled.min((l1 - l2) / scale);
                    }
                    if i < 1000 {
                        rows.push(vec![f(a), f(b), f(l1), f(l2)]);
                    }
                }
                let [p1, p2] = manifold::geometric_burgers_hyperbolicity(0.0, 1.0);
                let sqrt3 = 3.0f64.sqrt();
                let fixed_err = (p1 - sqrt3).abs().max((p2 + sqrt3).abs());
                let [z1, z2] = manifold::geometric_burgers_hyperbolicity(0.0, 0.0);
                let csv = csv_from_rows(&["a", "b", "lambda1", "lambda2"], rows.into_iter());
                artifacts.push(write_artifact(out_dir, "hyperbolic_samples.csv", &csv)?);
                let criteria = vec![
                    CriterionResult::le("char_poly_residual", worst_residual, 1e-10),
                    CriterionResult::ge("scaled_root_gap", min_gap_scaled, 2.0 * 3.0f64.sqrt() - 1e-9),
                    CriterionResult::le("reference_point_err", fixed_err, 1e-12),
                    CriterionResult::le("umbilical_roots", z1.abs().max(z2.abs()), 0.0),
                ];
                let measured = serde_json::json!({
                    "worst_residual": worst_residual,
                    "min_gap_scaled": min_gap_scaled,
                });
                (serde_json::to_value(&p).unwrap(), criteria, measured)
            }
            other => {
                return Err(CliError::UnknownExperiment {
                    name: other.into(),
                    known: EXPERIMENT_NAMES.join(", "),
                })
            }
        };

    Ok(RunSummary {
        experiment: config.experiment.clone(),
        library_version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        params: params_json,
        criteria,
        measured,
        artifacts,
        timestamp_unix: super::now_unix(),
        pass: false,
    })
}
