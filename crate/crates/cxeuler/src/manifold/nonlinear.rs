//! Evaluation of the analytic remainder `F̃(w, ∂_x w)` by spectral products.

use super::system::LocalSystem;
use super::ManifoldError;
use crate::fourier::{FourierField, NormSpec};
use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

/// Galerkin-truncated convolution of two centered coefficient vectors.
fn convolve_into(a: &[Complex64], b: &[Complex64], out: &mut [Complex64]) {
    let modes = a.len();
    let kc = modes as i64 / 2;
    out.fill(Complex64::default());
    for (i, &ai) in a.iter().enumerate() {
        if ai == Complex64::default() {
            continue;
        }
        let ki = i as i64 - kc;
        for (j, &bj) in b.iter().enumerate() {
            if bj == Complex64::default() {
                continue;
            }
            let k = ki + (j as i64 - kc);
            if k.abs() <= kc {
                out[(k + kc) as usize] += ai * bj;
            }
        }
    }
}

/// Dense kernel: evaluate `F̃` given per-component coefficient columns of
/// `w` and of `p` (normally `∂_x w`). Columns are centered length-`2K+1`
/// vectors; the result is truncated at the same cutoff.
pub(crate) fn ftilde_columns(
    sys: &LocalSystem,
    w_cols: &[Vec<Complex64>],
    p_cols: &[Vec<Complex64>],
) -> Vec<Vec<Complex64>> {
    let modes = w_cols[0].len();
    let m = sys.m;
    let mut out = vec![vec![Complex64::default(); modes]; m];
    let mut acc = vec![Complex64::default(); modes];
    let mut tmp = vec![Complex64::default(); modes];
    for term in &sys.taylor {
        // Product of the monomial's factors, one convolution at a time.
        let mut first = true;
        for (c, &pow) in term.alpha.iter().enumerate() {
            for _ in 0..pow {
                if first {
                    acc.copy_from_slice(&w_cols[c]);
                    first = false;
                } else {
                    convolve_into(&acc, &w_cols[c], &mut tmp);
                    std::mem::swap(&mut acc, &mut tmp);
                }
            }
        }
        for (c, &pow) in term.beta.iter().enumerate() {
            for _ in 0..pow {
                if first {
                    acc.copy_from_slice(&p_cols[c]);
                    first = false;
                } else {
                    convolve_into(&acc, &p_cols[c], &mut tmp);
                    std::mem::swap(&mut acc, &mut tmp);
                }
            }
        }
        for (i, &coeff) in term.tensor.iter().enumerate() {
            if coeff != 0.0 {
                for (o, &v) in out[i].iter_mut().zip(acc.iter()) {
                    *o += coeff * v;
                }
            }
        }
    }
    out
}

/// Trajectory-layout wrapper: node views `[mode, component]` in, same out,
/// with `p = ∂_x w` derived spectrally.
pub(crate) fn ftilde_node(sys: &LocalSystem, node: ArrayView2<'_, Complex64>) -> Array2<Complex64> {
    let modes = node.shape()[0];
    let m = node.shape()[1];
    let kc = modes as i64 / 2;
    let mut w_cols = vec![vec![Complex64::default(); modes]; m];
    let mut p_cols = vec![vec![Complex64::default(); modes]; m];
    for mode in 0..modes {
        let ik = Complex64::new(0.0, (mode as i64 - kc) as f64);
        for c in 0..m {
            let z = node[(mode, c)];
            w_cols[c][mode] = z;
            p_cols[c][mode] = ik * z;
        }
    }
    let cols = ftilde_columns(sys, &w_cols, &p_cols);
    let mut out = Array2::default((modes, m));
    for (c, col) in cols.iter().enumerate() {
        for (mode, &z) in col.iter().enumerate() {
            out[(mode, c)] = z;
        }
    }
    out
}

/// Evaluate `F̃(w, wx)` for sparse fields (the public surface of the dense
/// kernel). Both arguments must be 1-D fields with the system's component
/// count; the result is Galerkin-truncated at the common cutoff. For systems
/// with a finite analyticity radius `ρ`, inputs must stay within `ρ/4` in
/// `A^{0}`-type size.
pub fn nonlinear_eval(
    sys: &LocalSystem,
    w: &FourierField,
    wx: &FourierField,
) -> Result<FourierField, ManifoldError> {
    if w.dim() != 1 || wx.dim() != 1 || w.components() != sys.m || wx.components() != sys.m {
        return Err(ManifoldError::Shape(format!(
            "nonlinear_eval expects 1-D fields with {} components",
            sys.m
        )));
    }
    if sys.rho.is_finite() {
        let a0 = NormSpec::wiener(0.0, 0.0).expect("valid");
        let size = w.norm(&a0).max(wx.norm(&a0));
        if size > sys.rho / 4.0 {
            return Err(ManifoldError::OutsideAnalyticityBall { size, quarter_rho: sys.rho / 4.0 });
        }
    }
    let cutoff = w.cutoff().max(wx.cutoff());
    let modes = 2 * cutoff as usize + 1;
    let kc = cutoff as i32;
    let mut w_cols = vec![vec![Complex64::default(); modes]; sys.m];
    let mut p_cols = vec![vec![Complex64::default(); modes]; sys.m];
    for (k, c) in w.iter() {
        for (j, &z) in c.iter().enumerate() {
            w_cols[j][(k[0] + kc) as usize] = z;
        }
    }
    for (k, c) in wx.iter() {
        for (j, &z) in c.iter().enumerate() {
            p_cols[j][(k[0] + kc) as usize] = z;
        }
    }
    let cols = ftilde_columns(sys, &w_cols, &p_cols);
    let mut out = FourierField::new(1, cutoff, sys.m)?;
    for mode in 0..modes {
        let coeff: Vec<Complex64> = cols.iter().map(|col| col[mode]).collect();
        if coeff.iter().any(|z| *z != Complex64::default()) {
            out.set([mode as i32 - kc, 0], coeff)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single_mode_w(delta: f64, cutoff: u32) -> (FourierField, FourierField) {
        // w = δ e^{ix} in the direction (1, −i); wx = i w.
        let mut w = FourierField::new(1, cutoff, 2).unwrap();
        w.set([1, 0], vec![c(delta, 0.0), c(0.0, -delta)]).unwrap();
        let mut wx = FourierField::new(1, cutoff, 2).unwrap();
        wx.set([1, 0], vec![c(0.0, delta), c(delta, 0.0)]).unwrap();
        (w, wx)
    }

    #[test]
    fn zero_input_gives_zero() {
        let sys = LocalSystem::burgers();
        let z = FourierField::new(1, 4, 2).unwrap();
        let out = nonlinear_eval(&sys, &z, &z).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn burgers_single_mode_lands_on_second_harmonic() {
        // One convolution by hand: F̃ = −3(w₁p₁ − w₂p₂, w₁p₂ + w₂p₁) on
        // w = δ(1, −i)e^{ix} gives −6δ²(i, 1)e^{2ix}.
        let sys = LocalSystem::burgers();
        let delta = 1e-2;
        let (w, wx) = single_mode_w(delta, 4);
        let out = nonlinear_eval(&sys, &w, &wx).unwrap();
        assert_eq!(out.mode_count(), 1);
        let v = out.get(&[2, 0]).unwrap();
        let scale = 6.0 * delta * delta;
        assert!((v[0] - c(0.0, -scale)).norm() < 1e-15);
        assert!((v[1] - c(-scale, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn composition_bound_on_random_small_data() {
        // ‖F̃(w, ∂_x w)‖_{A⁰} ≤ Σ |coeff| ‖w‖^{|α|} ‖∂_x w‖^{|β|}.
        use rand::{Rng, SeedableRng};
        let sys = LocalSystem::burgers();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let a0 = NormSpec::wiener(0.0, 0.0).unwrap();
        for _ in 0..20 {
            let mut w = FourierField::new(1, 16, 2).unwrap();
            for k in -4i32..=4 {
                if rng.gen_bool(0.6) {
                    w.set(
                        [k, 0],
                        vec![
                            c(rng.gen_range(-0.01..0.01), rng.gen_range(-0.01..0.01)),
                            c(rng.gen_range(-0.01..0.01), rng.gen_range(-0.01..0.01)),
                        ],
                    )
                    .unwrap();
                }
            }
            let wx = w.derivative(0).unwrap();
            let out = nonlinear_eval(&sys, &w, &wx).unwrap();
            let nw = w.norm(&a0);
            let np = wx.norm(&a0);
            let mut bound = 0.0;
            for term in &sys.taylor {
                let coeff: f64 = term.tensor.iter().map(|t| t.abs()).sum();
                let da: u32 = term.alpha.iter().sum();
                let db: u32 = term.beta.iter().sum();
                bound += coeff * nw.powi(da as i32) * np.powi(db as i32);
            }
            assert!(out.norm(&a0) <= bound * (1.0 + 1e-12), "bound violated");
        }
    }

    #[test]
    fn analyticity_ball_is_enforced() {
        // Same quadratic remainder but with a declared finite radius.
        let sys = LocalSystem::new(
            vec![0.0, 1.0],
            nalgebra::DMatrix::zeros(2, 2),
            nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, -3.0, 3.0, 0.0]),
            LocalSystem::burgers().taylor,
            0.1,
        )
        .unwrap();
        let (w, wx) = single_mode_w(1.0, 4);
        assert!(matches!(
            nonlinear_eval(&sys, &w, &wx),
            Err(ManifoldError::OutsideAnalyticityBall { .. })
        ));
        let (w, wx) = single_mode_w(1e-3, 4);
        assert!(nonlinear_eval(&sys, &w, &wx).is_ok());
    }
}
