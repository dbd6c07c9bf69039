//! Conservation and linear-instability experiments on the 2-D solver.

use super::{Euler2dError, Euler2dSolver, SolverConfig, VorticityState};
use crate::fourier::FourierField;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

/// Parameters for the conservation run: seeded random analytic data with
/// exponential coefficient decay, evolved over `[0, t_end]` while tracking
/// relative drifts of the four conserved quantities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConserveParams {
    pub cutoff: u32,
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    /// Band of seeded modes: `0 < |k|_∞ ≤ active_modes`.
    pub active_modes: i32,
    pub amplitude: f64,
    /// Exponential decay rate of seeded coefficients in `|k|`.
    pub decay: f64,
    pub mean_u_re: [f64; 2],
    pub mean_u_im: [f64; 2],
    /// Relative drift allowed per conserved quantity.
    pub tol: f64,
    pub samples: usize,
}

impl Default for ConserveParams {
    fn default() -> Self {
        Self {
            cutoff: 64,
            dt: 1e-3,
            t_end: 1.0,
            seed: 2,
            active_modes: 6,
            amplitude: 0.05,
            decay: 0.8,
            mean_u_re: [0.02, -0.015],
            mean_u_im: [0.03, 0.01],
            tol: 1e-6,
            samples: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConserveSample {
    pub t: f64,
    pub energy: f64,
    pub enstrophy_re: f64,
    pub enstrophy_im: f64,
    pub casimir3_re: f64,
    pub casimir3_im: f64,
    pub mean_re: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConserveOutcome {
    pub params: ConserveParams,
    pub samples: Vec<ConserveSample>,
    /// Max relative drifts of (energy, bilinear enstrophy, ∫ω³, Re mean).
    pub max_rel_drift: [f64; 4],
    pub pass: bool,
}

/// Build the seeded analytic state used by the conservation run.
pub fn seeded_analytic_state(params: &ConserveParams) -> Result<VorticityState, Euler2dError> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(params.seed);
    let mut f = FourierField::scalar_2d(params.cutoff);
    for k1 in -params.active_modes..=params.active_modes {
        for k2 in -params.active_modes..=params.active_modes {
            if (k1, k2) == (0, 0) {
                continue;
            }
            let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
            let a = params.amplitude * (-params.decay * r).exp();
            f.set(
                [k1, k2],
                vec![Complex64::new(
                    a * rng.gen_range(-1.0..1.0),
                    a * rng.gen_range(-1.0..1.0),
                )],
            )?;
        }
    }
    let mean = [
        Complex64::new(params.mean_u_re[0], params.mean_u_im[0]),
        Complex64::new(params.mean_u_re[1], params.mean_u_im[1]),
    ];
    VorticityState::from_field(&f, mean, 0.0)
}

fn rel(delta: f64, base: f64) -> f64 {
    delta / base.max(1e-300)
}

/// Evolve seeded analytic complex data and measure conservation drifts.
pub fn conservation_experiment(params: &ConserveParams) -> Result<ConserveOutcome, Euler2dError> {
    let mut state = seeded_analytic_state(params)?;
    let config = SolverConfig::new(params.cutoff, params.dt)?;
    let mut solver = Euler2dSolver::new(config);

    let d0 = solver.diagnostics(&state);
    let sample_of = |t: f64, d: &super::Diagnostics| ConserveSample {
        t,
        energy: d.energy,
        enstrophy_re: d.enstrophy.re,
        enstrophy_im: d.enstrophy.im,
        casimir3_re: d.casimir3.re,
        casimir3_im: d.casimir3.im,
        mean_re: d.mean_re,
    };
    let mut samples = vec![sample_of(0.0, &d0)];

    let steps = (params.t_end / params.dt).round() as usize;
    let stride = (steps / params.samples.max(1)).max(1);
    let mut max_drift = [0.0f64; 4];
    for n in 1..=steps {
        state = solver.step(&state)?;
        if n % stride == 0 || n == steps {
            let d = solver.diagnostics(&state);
            let drifts = [
                rel((d.energy - d0.energy).abs(), d0.energy.abs()),
                rel((d.enstrophy - d0.enstrophy).norm(), d0.enstrophy.norm()),
                rel((d.casimir3 - d0.casimir3).norm(), d0.casimir3.norm()),
                rel(
                    ((d.mean_re[0] - d0.mean_re[0]).powi(2)
                        + (d.mean_re[1] - d0.mean_re[1]).powi(2))
                    .sqrt(),
                    (d0.mean_re[0].powi(2) + d0.mean_re[1].powi(2)).sqrt(),
                ),
            ];
            for (m, d) in max_drift.iter_mut().zip(drifts) {
                *m = m.max(d);
            }
            samples.push(sample_of(n as f64 * params.dt, &d));
        }
    }
    let pass = max_drift.iter().all(|&d| d <= params.tol);
    Ok(ConserveOutcome { params: params.clone(), samples, max_rel_drift: max_drift, pass })
}

/// Parameters for the linearized instability-rate measurement around a
/// constant complex background `a`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthParams {
    pub background_re: [f64; 2],
    pub background_im: [f64; 2],
    pub mode: [i32; 2],
    /// Perturbation amplitude `δ ≪ |a|`.
    pub delta: f64,
    pub cutoff: u32,
    pub dt: f64,
    /// Horizon; the run also stops once the mode has grown by
    /// `max_growth_factor`.
    pub t_end: f64,
    pub max_growth_factor: f64,
    /// Fraction trimmed from both ends of the log-amplitude fit window.
    pub fit_trim: f64,
}

impl Default for GrowthParams {
    fn default() -> Self {
        Self {
            background_re: [0.0, 0.0],
            background_im: [-1.0, 0.0],
            mode: [1, 0],
            delta: 1e-6,
            cutoff: 16,
            dt: 1e-3,
            t_end: 6.0,
            max_growth_factor: 1e3,
            fit_trim: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthOutcome {
    pub params: GrowthParams,
    /// Fitted exponential rate of `|ω̂_k(t)|`.
    pub measured_rate: f64,
    /// `Im(ā·k)`, the linearized prediction.
    pub predicted_rate: f64,
    /// Contract tolerance `0.01·|a||k|`.
    pub tolerance: f64,
    pub growth_factor: f64,
    pub samples: Vec<(f64, f64)>,
    pub pass: bool,
}

/// Measure the growth rate of a single vorticity mode under the full
/// nonlinear solver near `u ≡ a` and compare with the linear prediction
/// `Im(ā·k)`.
pub fn linear_growth_check(params: &GrowthParams) -> Result<GrowthOutcome, Euler2dError> {
    let a = [
        Complex64::new(params.background_re[0], params.background_im[0]),
        Complex64::new(params.background_re[1], params.background_im[1]),
    ];
    let a_abs = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let k_abs = ((params.mode[0].pow(2) + params.mode[1].pow(2)) as f64).sqrt();
    if params.delta >= 0.1 * a_abs {
        return Err(Euler2dError::InvalidConfig {
            name: "delta",
            message: format!("perturbation {} not small against |a| = {}", params.delta, a_abs),
        });
    }
    let kmax = params.mode[0].abs().max(params.mode[1].abs());
    if params.cutoff < 4 * kmax as u32 {
        return Err(Euler2dError::InvalidConfig {
            name: "cutoff",
            message: format!("need K >= 4·|k|_∞ = {} for harmonics room", 4 * kmax),
        });
    }
    // ā·k = conj(a)·k; the mode grows like e^{Im(ā·k) t}.
    let adotk =
        a[0].conj() * params.mode[0] as f64 + a[1].conj() * params.mode[1] as f64;
    let predicted = adotk.im;

    let mut state = VorticityState::zero(params.cutoff);
    state.mean_u = a;
    state.set_coeff(params.mode, Complex64::new(params.delta, 0.0))?;
    let mut solver = Euler2dSolver::new(SolverConfig::new(params.cutoff, params.dt)?);

    let mut samples = vec![(0.0, params.delta.ln())];
    let steps = (params.t_end / params.dt).ceil() as usize;
    for n in 1..=steps {
        state = solver.step(&state)?;
        let amp = state.coeff(params.mode).norm();
        samples.push((n as f64 * params.dt, amp.ln()));
        if amp >= params.max_growth_factor * params.delta {
            break;
        }
    }
    let final_amp = samples.last().unwrap().1.exp();
    if final_amp > 1e-2 * a_abs {
        return Err(Euler2dError::NonlinearFitWindow { fraction: final_amp / a_abs });
    }

    // Least-squares slope over the trimmed window.
    let lo = (samples.len() as f64 * params.fit_trim) as usize;
    let hi = samples.len() - lo;
    let window = &samples[lo..hi];
    let n = window.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, y) in window {
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let measured = (n * sty - st * sy) / (n * stt - st * st);
    let tolerance = 0.01 * a_abs * k_abs;
    Ok(GrowthOutcome {
        params: params.clone(),
        measured_rate: measured,
        predicted_rate: predicted,
        tolerance,
        growth_factor: final_amp / params.delta,
        samples,
        pass: (measured - predicted).abs() <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_prediction_formula() {
        // a = (−i, 0): ā·k = i·k₁, so mode (1,0) grows at rate 1 and mode
        // (−1,0) decays at rate −1; real backgrounds only oscillate.
        let mk = |mode: [i32; 2], im: [f64; 2], re: [f64; 2]| {
            let a = [Complex64::new(re[0], im[0]), Complex64::new(re[1], im[1])];
            (a[0].conj() * mode[0] as f64 + a[1].conj() * mode[1] as f64).im
        };
        assert_eq!(mk([1, 0], [-1.0, 0.0], [0.0, 0.0]), 1.0);
        assert_eq!(mk([-1, 0], [-1.0, 0.0], [0.0, 0.0]), -1.0);
        assert_eq!(mk([3, -2], [0.0, 0.0], [0.7, -0.4]), 0.0);
    }

    #[test]
    fn decaying_mode_measured_rate() {
        // Short run on the decaying branch: rate −1 within 1%.
        let params = GrowthParams {
            mode: [-1, 0],
            cutoff: 8,
            t_end: 2.0,
            delta: 1e-4,
            ..Default::default()
        };
        let out = linear_growth_check(&params).unwrap();
        assert!(
            (out.measured_rate - (-1.0)).abs() <= out.tolerance,
            "measured {} predicted {}",
            out.measured_rate,
            out.predicted_rate
        );
    }

    #[test]
    fn conservation_on_small_grid() {
        let params = ConserveParams {
            cutoff: 16,
            dt: 2e-3,
            t_end: 0.5,
            active_modes: 4,
            ..Default::default()
        };
        let out = conservation_experiment(&params).unwrap();
        assert!(out.pass, "drifts {:?}", out.max_rel_drift);
    }

    #[test]
    fn oversized_perturbation_rejected() {
        let params = GrowthParams { delta: 0.5, ..Default::default() };
        assert!(matches!(
            linear_growth_check(&params),
            Err(Euler2dError::InvalidConfig { name: "delta", .. })
        ));
    }
}
