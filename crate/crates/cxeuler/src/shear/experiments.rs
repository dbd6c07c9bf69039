//! Norm-inflation and loss-of-analyticity experiments on the shear system.

use super::{ShearError, ShearSolver, ShearState};
use crate::fourier::{bracket, estimate_analyticity_radius, FourierField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Parameters for the norm-inflation experiment: start from
/// `q = −ε/2, b = (ε/(2⟨k⟩^s)) e^{ikx}` with `‖u‖_{H^s} < ε` and record when
/// the `H^s` norm crosses `M`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InflationParams {
    pub eps: f64,
    pub s: f64,
    /// Norm level to cross.
    pub m_target: f64,
    /// Time horizon.
    pub t_max: f64,
    /// Step size.
    pub dt: f64,
    /// Safety factor on the predicted crossing-time bound.
    pub margin: f64,
    /// Additional runs at `2k, 4k, …` to check the crossing time shrinks.
    pub doublings: u32,
    /// Keep every `trace_stride`-th sample in the returned trace.
    pub trace_stride: usize,
}

impl Default for InflationParams {
    fn default() -> Self {
        Self {
            eps: 0.1,
            s: 1.0,
            m_target: 10.0,
            t_max: 10.0,
            dt: 1e-4,
            margin: 5.0,
            doublings: 2,
            trace_stride: 10,
        }
    }
}

/// One integration at a fixed carrier mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InflationRun {
    pub k: i64,
    /// First time the `H^s` norm exceeds the target, if reached.
    pub t_cross: Option<f64>,
    pub achieved_sup: f64,
}

/// One trace row of the inflation run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InflationSample {
    pub t: f64,
    pub q: f64,
    pub energy: f64,
    pub hs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InflationOutcome {
    pub params: InflationParams,
    /// Smallest admissible wavenumber.
    pub k_used: i64,
    /// Measured first crossing for `k_used` (`None` signals the parameter
    /// choice was too tight, not a solver failure).
    pub t0: Option<f64>,
    /// `(π/(kε)) log⟨k⟩^s`, the predicted crossing-time scale.
    pub predicted_t0: f64,
    pub initial_hs: f64,
    /// Time series of the main run.
    pub trace: Vec<InflationSample>,
    /// Main run plus the doubled-`k` reruns.
    pub runs: Vec<InflationRun>,
}

impl InflationOutcome {
    /// Measured crossing within the margin-scaled prediction.
    pub fn crossing_within_bound(&self) -> bool {
        match self.t0 {
            Some(t0) => t0 <= self.params.margin * self.predicted_t0,
            None => false,
        }
    }

    /// Crossing times non-increasing along the doubling sequence.
    pub fn doubling_monotone(&self) -> bool {
        self.runs.windows(2).all(|w| match (w[0].t_cross, w[1].t_cross) {
            (Some(a), Some(b)) => b <= a + 1e-12,
            _ => false,
        })
    }
}

fn validate_positive(name: &'static str, value: f64) -> Result<(), ShearError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ShearError::InvalidParam { name, message: format!("must be positive, got {value}") })
    }
}

/// Predicted crossing-time scale `(π/(kε)) log⟨k⟩^s`.
pub fn predicted_crossing_time(k: f64, eps: f64, s: f64) -> f64 {
    std::f64::consts::PI / (k * eps) * bracket(k).powf(s).ln()
}

fn inflation_single_run(
    k: i64,
    params: &InflationParams,
    keep_trace: bool,
) -> Result<(InflationRun, Vec<InflationSample>, f64), ShearError> {
    let eps = params.eps;
    let amp = eps / (2.0 * bracket(k as f64).powf(params.s));
    let mut b = FourierField::scalar_1d(k.unsigned_abs() as u32 + 1);
    b.set1(k as i32, Complex64::new(amp, 0.0))?;
    let state = ShearState::new(-eps / 2.0, b, 0.0)?;
    let initial_hs = state.hs_norm(params.s);

    let mut solver = ShearSolver::new(&state)?;
    let mut trace = Vec::new();
    let mut prev = (0.0, initial_hs);
    if keep_trace {
        trace.push(InflationSample { t: 0.0, q: solver.q(), energy: solver.energy(), hs: initial_hs });
    }
    let mut t_cross = None;
    let mut sup = initial_hs;
    let steps = (params.t_max / params.dt).ceil() as usize;
    for n in 1..=steps {
        solver.step(params.dt)?;
        let t = n as f64 * params.dt;
        let hs = solver.hs_norm(params.s);
        sup = sup.max(hs);
        if keep_trace && (n % params.trace_stride == 0 || n == steps) {
            trace.push(InflationSample { t, q: solver.q(), energy: solver.energy(), hs });
        }
        if t_cross.is_none() && hs > params.m_target {
            // Linear interpolation between the bracketing samples.
            let (t_prev, h_prev) = prev;
            let frac = (params.m_target - h_prev) / (hs - h_prev);
            t_cross = Some(t_prev + frac * (t - t_prev));
            if !keep_trace {
                break;
            }
        }
        prev = (t, hs);
        if t_cross.is_some() && keep_trace && hs > 2.0 * params.m_target {
            break;
        }
    }
    Ok((InflationRun { k, t_cross, achieved_sup: sup }, trace, initial_hs))
}

/// Select the smallest admissible wavenumber and integrate; rerun at doubled
/// wavenumbers to confirm the crossing time does not grow.
pub fn norm_inflation_experiment(params: &InflationParams) -> Result<InflationOutcome, ShearError> {
    validate_positive("eps", params.eps)?;
    validate_positive("m_target", params.m_target)?;
    validate_positive("t_max", params.t_max)?;
    validate_positive("dt", params.dt)?;
    if params.s < 0.0 {
        return Err(ShearError::InvalidParam {
            name: "s",
            message: format!("must be nonnegative, got {}", params.s),
        });
    }

    // Smallest k with (ε/4)⟨k⟩^s > M whose predicted crossing fits in t_max.
    let mut k_used = None;
    for k in 1..=100_000_000i64 {
        let kf = k as f64;
        if params.eps / 4.0 * bracket(kf).powf(params.s) > params.m_target {
            if predicted_crossing_time(kf, params.eps, params.s) < params.t_max {
                k_used = Some(k);
            }
            break;
        }
    }
    let k_used = k_used.ok_or(ShearError::NoAdmissibleMode)?;

    let (main_run, trace, initial_hs) = inflation_single_run(k_used, params, true)?;
    let mut runs = vec![main_run.clone()];
    for d in 1..=params.doublings {
        let k = k_used << d;
        let (run, _, _) = inflation_single_run(k, params, false)?;
        runs.push(run);
    }

    Ok(InflationOutcome {
        params: params.clone(),
        k_used,
        t0: main_run.t_cross,
        predicted_t0: predicted_crossing_time(k_used as f64, params.eps, params.s),
        initial_hs,
        trace,
        runs,
    })
}

/// Parameters for the loss-of-analyticity experiment: rough-profile data
/// `|b_k| = ⟨k⟩^{−p}`, `k = 1..K`, positive background `q`, radius of
/// analyticity tracked against `∫₀ᵗ q ds`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticityParams {
    pub q_in: f64,
    /// Decay exponent `p ∈ (1/2, 1]` of the initial profile.
    pub decay_exponent: f64,
    pub cutoff: u32,
    pub t_end: f64,
    pub dt: f64,
    /// Number of radius samples along the run.
    pub samples: usize,
    /// Relative tolerance for `radius ≈ ∫ q ds` over the late half.
    pub rel_tol: f64,
}

impl Default for AnalyticityParams {
    fn default() -> Self {
        Self {
            q_in: 1.0,
            decay_exponent: 1.0,
            cutoff: 256,
            t_end: 2.0,
            dt: 1e-5,
            samples: 32,
            rel_tol: 0.02,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticitySample {
    pub t: f64,
    pub q: f64,
    pub energy: f64,
    /// Fitted radius of analyticity of `b(·, t)`.
    pub radius: f64,
    /// `∫₀ᵗ q ds`, the exact radius per the integrating-factor
    /// representation.
    pub integral_q: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticityOutcome {
    pub params: AnalyticityParams,
    pub samples: Vec<AnalyticitySample>,
    /// Worst `|radius − ∫q|/∫q` over the late half `t ∈ [T/2, T]`.
    pub max_rel_radius_err: f64,
    /// Fitted slope of radius against time over the late half.
    pub fitted_slope: f64,
    pub q_monotone: bool,
    pub max_energy_drift: f64,
}

/// Track the analyticity radius of the forward evolution from rough data.
/// The time-reversed trajectory is an analytic solution on `(−T, 0)` whose
/// trace at time zero has the rough profile.
pub fn loss_of_analyticity_experiment(
    params: &AnalyticityParams,
) -> Result<AnalyticityOutcome, ShearError> {
    validate_positive("q_in", params.q_in)?;
    validate_positive("t_end", params.t_end)?;
    validate_positive("dt", params.dt)?;
    if !(params.decay_exponent > 0.5 && params.decay_exponent <= 1.0) {
        return Err(ShearError::InvalidParam {
            name: "decay_exponent",
            message: format!("must lie in (1/2, 1], got {}", params.decay_exponent),
        });
    }
    if params.cutoff < 4 {
        return Err(ShearError::InvalidParam {
            name: "cutoff",
            message: format!("need at least 4 modes, got {}", params.cutoff),
        });
    }

    let mut b = FourierField::scalar_1d(params.cutoff);
    for k in 1..=params.cutoff as i32 {
        let amp = bracket(k as f64).powf(-params.decay_exponent);
        b.set1(k, Complex64::new(amp, 0.0))?;
    }
    let state = ShearState::new(params.q_in, b, 0.0)?;
    let e0 = state.energy();
    let mut solver = ShearSolver::new(&state)?;

    let steps = (params.t_end / params.dt).round() as usize;
    let stride = (steps / params.samples).max(1);
    let mut samples = Vec::new();
    let mut q_monotone = true;
    let mut max_energy_drift = 0.0f64;
    let mut q_prev = solver.q();
    for n in 1..=steps {
        solver.step(params.dt)?;
        if solver.q() < q_prev - 1e-13 {
            q_monotone = false;
        }
        q_prev = solver.q();
        max_energy_drift = max_energy_drift.max((solver.energy() - e0).abs() / e0);
        if n % stride == 0 || n == steps {
            let snapshot = solver.state();
            let radius = estimate_analyticity_radius(&snapshot.b)?;
            samples.push(AnalyticitySample {
                t: snapshot.t,
                q: solver.q(),
                energy: solver.energy(),
                radius,
                integral_q: solver.integral_q(),
            });
        }
    }

    let half = params.t_end / 2.0;
    let late: Vec<&AnalyticitySample> = samples.iter().filter(|s| s.t >= half - 1e-12).collect();
    let max_rel_radius_err = late
        .iter()
        .map(|s| (s.radius - s.integral_q).abs() / s.integral_q)
        .fold(0.0f64, f64::max);

    // Least-squares slope of radius vs t over the late half.
    let n = late.len() as f64;
    let (mut st, mut sr, mut stt, mut str_) = (0.0, 0.0, 0.0, 0.0);
    for s in &late {
        st += s.t;
        sr += s.radius;
        stt += s.t * s.t;
        str_ += s.t * s.radius;
    }
    let fitted_slope = (n * str_ - st * sr) / (n * stt - st * st);

    Ok(AnalyticityOutcome {
        params: params.clone(),
        samples,
        max_rel_radius_err,
        fitted_slope,
        q_monotone,
        max_energy_drift,
    })
}
