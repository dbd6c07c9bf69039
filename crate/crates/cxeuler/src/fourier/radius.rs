//! Analyticity-radius estimation from coefficient decay.
//!
//! Coefficients of a function analytic in a strip of half-width `r` decay
//! like `|f̂(k)| ~ P(|k|) e^{−r|k|}` with a subexponential prefactor. The
//! estimator fits `log|f̂(k)| ≈ c − r|k| − p·log⟨k⟩` by least squares and
//! reports the coefficient on `−|k|`; the `log⟨k⟩` regressor absorbs
//! polynomial prefactors that would otherwise bias the slope. When the design
//! is too collinear for three parameters (all usable modes in a narrow band),
//! the fit falls back to the plain two-parameter slope.

use super::{FourierError, FourierField};
use nalgebra::{DMatrix, DVector};

/// Modes with `|f̂(k)|` at or below this floor are excluded from the fit;
/// below it the roundoff plateau corrupts the slope.
pub const RADIUS_COEFF_FLOOR: f64 = 1e-13;

/// Condition threshold (after column scaling) beyond which the prefactor
/// regressor is dropped.
const DESIGN_COND_LIMIT: f64 = 1e10;

/// Least-squares analyticity radius of `f`, clamped below at zero.
///
/// Fails with [`FourierError::RadiusUndetermined`] when fewer than three
/// modes lie above [`RADIUS_COEFF_FLOOR`].
pub fn estimate_analyticity_radius(f: &FourierField) -> Result<f64, FourierError> {
    let mut absk = Vec::new();
    let mut logc = Vec::new();
    for (k, c) in f.iter() {
        let a = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if a > RADIUS_COEFF_FLOOR {
            let kk = ((k[0] as f64).powi(2) + (k[1] as f64).powi(2)).sqrt();
            absk.push(kk);
            logc.push(a.ln());
        }
    }
    let n = absk.len();
    if n < 3 {
        return Err(FourierError::RadiusUndetermined { usable: n });
    }

    let slope = fit_slope(&absk, &logc, true).or_else(|| fit_slope(&absk, &logc, false));
    match slope {
        Some(r) => Ok(r.max(0.0)),
        None => Err(FourierError::RadiusUndetermined { usable: n }),
    }
}

/// Solve the scaled least-squares problem; returns the coefficient on `−|k|`.
fn fit_slope(absk: &[f64], logc: &[f64], with_prefactor: bool) -> Option<f64> {
    let n = absk.len();
    let ncols = if with_prefactor { 3 } else { 2 };
    let mut design = DMatrix::zeros(n, ncols);
    for (i, &k) in absk.iter().enumerate() {
        design[(i, 0)] = 1.0;
        design[(i, 1)] = -k;
        if with_prefactor {
            design[(i, 2)] = -(1.0 + k * k).sqrt().ln();
        }
    }
    let rhs = DVector::from_column_slice(logc);

    // Column scaling keeps the conditioning test meaningful.
    let mut scales = vec![1.0; ncols];
    for j in 0..ncols {
        let s = design.column(j).norm();
        if s == 0.0 {
            return None;
        }
        scales[j] = s;
        for i in 0..n {
            design[(i, j)] /= s;
        }
    }

    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 0.0 || smax / smin > DESIGN_COND_LIMIT {
        return None;
    }
    let sol = svd.solve(&rhs, 0.0).ok()?;
    Some(sol[1] / scales[1])
}
