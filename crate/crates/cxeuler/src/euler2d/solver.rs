//! Right side evaluation and RK4 stepping.

use super::fft::{dealias_grid_size, SpectralGrid};
use super::{Diagnostics, Euler2dError, SolverConfig, VorticityState};
use ndarray::Array2;
use num_complex::Complex64;

/// Owns FFT plans and grid buffers for one configuration.
pub struct Euler2dSolver {
    config: SolverConfig,
    grid: SpectralGrid,
    g1: Array2<Complex64>,
    g2: Array2<Complex64>,
    g3: Array2<Complex64>,
    g4: Array2<Complex64>,
}

impl Euler2dSolver {
    pub fn new(config: SolverConfig) -> Self {
        let n = if config.dealias {
            dealias_grid_size(config.cutoff)
        } else {
            2 * config.cutoff as usize + 1
        };
        let grid = SpectralGrid::new(config.cutoff, n);
        let g = grid.alloc_grid();
        Self { config, grid, g1: g.clone(), g2: g.clone(), g3: g.clone(), g4: g }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn check_state(&self, state: &VorticityState) -> Result<(), Euler2dError> {
        if state.cutoff != self.config.cutoff {
            return Err(Euler2dError::CutoffMismatch {
                state: state.cutoff,
                solver: self.config.cutoff,
            });
        }
        let tail = state.tail_fraction();
        if tail > self.config.tail_threshold {
            return Err(Euler2dError::ResolutionExhausted {
                t: state.t,
                tail_fraction: tail,
                threshold: self.config.tail_threshold,
            });
        }
        Ok(())
    }

    /// Velocity spectra `(û₁, û₂)` of a state, mean included.
    fn velocity_spectra(state: &VorticityState) -> (Array2<Complex64>, Array2<Complex64>) {
        let k = state.cutoff as i32;
        let side = 2 * state.cutoff as usize + 1;
        let mut u1 = Array2::default((side, side));
        let mut u2 = Array2::default((side, side));
        for ((a1, a2), w) in state.omega.indexed_iter() {
            let (k1, k2) = (a1 as i32 - k, a2 as i32 - k);
            if (k1, k2) == (0, 0) {
                continue;
            }
            let ksq = (k1 * k1 + k2 * k2) as f64;
            let factor = Complex64::new(0.0, -1.0) * w / ksq;
            u1[(a1, a2)] = factor * -(k2 as f64);
            u2[(a1, a2)] = factor * k1 as f64;
        }
        let c = state.cutoff as usize;
        u1[(c, c)] = state.mean_u[0];
        u2[(c, c)] = state.mean_u[1];
        (u1, u2)
    }

    /// `(∂_t ω̂, ∂_t mean_u)` of the transport system: the advection term
    /// `ū·∇ω` is formed pointwise on the padded grid and truncated back to
    /// the mode set; the mean obeys the spectral zeroth-mode law
    /// `∂_t û(0) = i Σ_j j Σ_l |û_l(j)|²` (the sum is purely imaginary, so
    /// the real part of the mean is conserved identically).
    pub fn vorticity_rhs(
        &mut self,
        state: &VorticityState,
    ) -> Result<(Array2<Complex64>, [Complex64; 2]), Euler2dError> {
        self.check_state(state)?;
        let kc = state.cutoff as i32;
        let (u1, u2) = Self::velocity_spectra(state);

        // Mean drift from the velocity spectrum.
        let mut drift = [0.0f64; 2];
        for ((a1, a2), v) in u1.indexed_iter() {
            let e = v.norm_sqr() + u2[(a1, a2)].norm_sqr();
            drift[0] += (a1 as i32 - kc) as f64 * e;
            drift[1] += (a2 as i32 - kc) as f64 * e;
        }
        let dmean = [Complex64::new(0.0, drift[0]), Complex64::new(0.0, drift[1])];

        // Gradient spectra of ω.
        let side = 2 * state.cutoff as usize + 1;
        let mut wx = Array2::<Complex64>::default((side, side));
        let mut wy = Array2::<Complex64>::default((side, side));
        for ((a1, a2), w) in state.omega.indexed_iter() {
            let (k1, k2) = (a1 as i32 - kc, a2 as i32 - kc);
            wx[(a1, a2)] = Complex64::new(0.0, k1 as f64) * w;
            wy[(a1, a2)] = Complex64::new(0.0, k2 as f64) * w;
        }

        self.grid.synth(&u1, &mut self.g1);
        self.grid.synth(&u2, &mut self.g2);
        self.grid.synth(&wx, &mut self.g3);
        self.grid.synth(&wy, &mut self.g4);
        for (((a, b), c), d) in
            self.g1.iter_mut().zip(self.g2.iter()).zip(self.g3.iter()).zip(self.g4.iter())
        {
            *a = a.conj() * c + b.conj() * d;
        }
        let mut domega = Array2::<Complex64>::default((side, side));
        self.grid.analyze(&mut self.g1, &mut domega);
        domega.mapv_inplace(|z| -z);
        let c = state.cutoff as usize;
        domega[(c, c)] = Complex64::default();

        Ok((domega, dmean))
    }

    /// One classical RK4 step of `(ω̂, mean_u)`.
    pub fn step(&mut self, state: &VorticityState) -> Result<VorticityState, Euler2dError> {
        let dt = self.config.dt;
        let add = |s: &VorticityState,
                   d: &(Array2<Complex64>, [Complex64; 2]),
                   factor: f64|
         -> VorticityState {
            let mut out = s.clone();
            out.omega.zip_mut_with(&d.0, |a, b| *a += factor * b);
            out.mean_u[0] += factor * d.1[0];
            out.mean_u[1] += factor * d.1[1];
            out.t += factor;
            out
        };

        let k1 = self.vorticity_rhs(state)?;
        let s2 = add(state, &k1, 0.5 * dt);
        let k2 = self.vorticity_rhs(&s2)?;
        let s3 = add(state, &k2, 0.5 * dt);
        let k3 = self.vorticity_rhs(&s3)?;
        let s4 = add(state, &k3, dt);
        let k4 = self.vorticity_rhs(&s4)?;

        let mut out = state.clone();
        let w = dt / 6.0;
        for ((((o, a), b), c), d) in out
            .omega
            .iter_mut()
            .zip(k1.0.iter())
            .zip(k2.0.iter())
            .zip(k3.0.iter())
            .zip(k4.0.iter())
        {
            *o += w * (a + 2.0 * b + 2.0 * c + d);
        }
        for i in 0..2 {
            out.mean_u[i] += w * (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i]);
        }
        out.t += dt;
        if self.config.exp_filter {
            apply_exp_filter(&mut out);
        }
        Ok(out)
    }

    /// Conservation diagnostics; the cubic Casimir needs the padded grid.
    pub fn diagnostics(&mut self, state: &VorticityState) -> Diagnostics {
        let kc = state.cutoff as i32;
        let mut energy = state.mean_u[0].norm_sqr() + state.mean_u[1].norm_sqr();
        let mut enstrophy = Complex64::default();
        let mut enstrophy_h = 0.0;
        for ((a1, a2), w) in state.omega.indexed_iter() {
            let (k1, k2) = (a1 as i32 - kc, a2 as i32 - kc);
            enstrophy_h += w.norm_sqr();
            if (k1, k2) != (0, 0) {
                energy += w.norm_sqr() / (k1 * k1 + k2 * k2) as f64;
                let opp = state.omega[((-k1 + kc) as usize, (-k2 + kc) as usize)];
                enstrophy += w * opp;
            }
        }
        self.grid.synth(&state.omega, &mut self.g1);
        let n2 = (self.grid.n * self.grid.n) as f64;
        let casimir3 = self.g1.iter().map(|z| z * z * z).sum::<Complex64>() / n2;
        Diagnostics {
            energy: 0.5 * energy,
            enstrophy,
            enstrophy_hermitian: enstrophy_h,
            casimir3,
            mean_re: [state.mean_u[0].re, state.mean_u[1].re],
        }
    }

    /// Physical-space velocity samples on the solver grid (for real-slice
    /// checks).
    pub fn velocity_grid(
        &mut self,
        state: &VorticityState,
    ) -> (Array2<Complex64>, Array2<Complex64>) {
        let (u1, u2) = Self::velocity_spectra(state);
        self.grid.synth(&u1, &mut self.g1);
        self.grid.synth(&u2, &mut self.g2);
        (self.g1.clone(), self.g2.clone())
    }
}

/// 36th-order exponential low-pass on the top third of the spectrum.
fn apply_exp_filter(state: &mut VorticityState) {
    let kc = state.cutoff as i32;
    let kmax = state.cutoff as f64;
    for ((a1, a2), w) in state.omega.indexed_iter_mut() {
        let rho = ((a1 as i32 - kc).abs().max((a2 as i32 - kc).abs())) as f64 / kmax;
        if rho > 2.0 / 3.0 {
            *w *= (-36.0 * rho.powi(36)).exp();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FourierField;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_analytic_state(
        cutoff: u32,
        active: i32,
        amplitude: f64,
        decay: f64,
        mean: [Complex64; 2],
        seed: u64,
    ) -> VorticityState {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut f = FourierField::scalar_2d(cutoff);
        for k1 in -active..=active {
            for k2 in -active..=active {
                if (k1, k2) == (0, 0) {
                    continue;
                }
                let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
                let a = amplitude * (-decay * r).exp();
                f.set(
                    [k1, k2],
                    vec![c(a * rng.gen_range(-1.0..1.0), a * rng.gen_range(-1.0..1.0))],
                )
                .unwrap();
            }
        }
        VorticityState::from_field(&f, mean, 0.0).unwrap()
    }

    #[test]
    fn constant_velocity_state_is_steady() {
        let state = {
            let mut s = VorticityState::zero(8);
            s.mean_u = [c(0.4, -0.7), c(0.0, 0.3)];
            s
        };
        let mut solver = Euler2dSolver::new(SolverConfig::new(8, 1e-2).unwrap());
        let (domega, dmean) = solver.vorticity_rhs(&state).unwrap();
        assert!(domega.iter().all(|z| z.norm() == 0.0));
        assert!(dmean[0].norm() < 1e-15 && dmean[1].norm() < 1e-15);
        let next = solver.step(&state).unwrap();
        assert!(next.max_abs_diff(&state) < 1e-15);
    }

    #[test]
    fn real_data_has_zero_mean_drift() {
        // Conjugate-symmetric spectrum + real mean: the drift sum cancels
        // pairwise.
        let mut f = FourierField::scalar_2d(6);
        f.set([1, 2], vec![c(0.3, 0.4)]).unwrap();
        f.set([-1, -2], vec![c(0.3, -0.4)]).unwrap();
        f.set([2, -1], vec![c(-0.2, 0.1)]).unwrap();
        f.set([-2, 1], vec![c(-0.2, -0.1)]).unwrap();
        let state = VorticityState::from_field(&f, [c(0.5, 0.0), c(-0.25, 0.0)], 0.0).unwrap();
        let mut solver = Euler2dSolver::new(SolverConfig::new(6, 1e-2).unwrap());
        let (_, dmean) = solver.vorticity_rhs(&state).unwrap();
        assert!(dmean[0].norm() < 1e-14 && dmean[1].norm() < 1e-14);
    }

    #[test]
    fn zero_field_is_a_fixed_point() {
        let state = VorticityState::zero(8);
        let mut solver = Euler2dSolver::new(SolverConfig::new(8, 1e-2).unwrap());
        let next = solver.step(&state).unwrap();
        assert_eq!(next.max_abs_diff(&state), 0.0);
    }

    #[test]
    fn real_initial_data_stays_real() {
        // Real (conjugate-symmetric) data must keep the physical velocity
        // real over [0, 1] to roundoff.
        let cutoff = 16u32;
        let mut f = FourierField::scalar_2d(cutoff);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for k1 in 0i32..=3 {
            for k2 in -3i32..=3 {
                if (k1, k2) == (0, 0) || (k1 == 0 && k2 < 0) {
                    continue;
                }
                let v = c(rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05));
                f.set([k1, k2], vec![v]).unwrap();
                f.set([-k1, -k2], vec![v.conj()]).unwrap();
            }
        }
        let mut state = VorticityState::from_field(&f, [c(0.1, 0.0), c(0.0, 0.0)], 0.0).unwrap();
        let mut solver = Euler2dSolver::new(SolverConfig::new(cutoff, 1e-2).unwrap());
        for _ in 0..100 {
            state = solver.step(&state).unwrap();
        }
        let (u1, u2) = solver.velocity_grid(&state);
        let max_im = u1
            .iter()
            .chain(u2.iter())
            .map(|z| z.im.abs())
            .fold(0.0f64, f64::max);
        assert!(max_im < 1e-12, "imaginary residue {max_im}");
    }

    #[test]
    fn rk4_order_at_least_3_8() {
        // Step-halving convergence study on smooth analytic complex data.
        let cutoff = 12u32;
        let state =
            random_analytic_state(cutoff, 4, 0.05, 0.7, [c(0.02, 0.05), c(-0.01, -0.03)], 9);
        let t_end = 0.2;
        let run = |dt: f64| -> VorticityState {
            let mut solver = Euler2dSolver::new(SolverConfig::new(cutoff, dt).unwrap());
            let mut s = state.clone();
            let steps = (t_end / dt).round() as usize;
            for _ in 0..steps {
                s = solver.step(&s).unwrap();
            }
            s
        };
        let reference = run(2.5e-3);
        let err1 = run(2e-2).max_abs_diff(&reference);
        let err2 = run(1e-2).max_abs_diff(&reference);
        let order = (err1 / err2).log2();
        assert!(order >= 3.8, "observed order {order} (errors {err1:.3e}, {err2:.3e})");
    }

    #[test]
    fn enstrophy_pairing_examples() {
        // Real data: bilinear enstrophy = Σ|ω̂|² > 0; single mode e^{ix₁}:
        // no opposite mode, so the pairing vanishes.
        let mut f = FourierField::scalar_2d(4);
        f.set([1, 0], vec![c(0.5, 0.25)]).unwrap();
        f.set([-1, 0], vec![c(0.5, -0.25)]).unwrap();
        let st = VorticityState::from_field(&f, [Complex64::default(); 2], 0.0).unwrap();
        let mut solver = Euler2dSolver::new(SolverConfig::new(4, 1e-2).unwrap());
        let d = solver.diagnostics(&st);
        assert!((d.enstrophy.im).abs() < 1e-15);
        assert!((d.enstrophy.re - d.enstrophy_hermitian).abs() < 1e-15);

        let mut g = FourierField::scalar_2d(4);
        g.set([1, 0], vec![c(1.0, 0.0)]).unwrap();
        let st2 = VorticityState::from_field(&g, [Complex64::default(); 2], 0.0).unwrap();
        let d2 = solver.diagnostics(&st2);
        assert_eq!(d2.enstrophy, Complex64::default());
        assert_eq!(d2.enstrophy_hermitian, 1.0);
    }

    #[test]
    fn tail_threshold_flags_resolution_exhausted() {
        let mut state = VorticityState::zero(12);
        state.set_coeff([1, 0], c(1.0, 0.0)).unwrap();
        state.set_coeff([11, 0], c(0.5, 0.0)).unwrap();
        let mut solver = Euler2dSolver::new(SolverConfig::new(12, 1e-2).unwrap());
        assert!(matches!(
            solver.step(&state),
            Err(Euler2dError::ResolutionExhausted { .. })
        ));
    }
}
