//! Small dense complex linear algebra on top of nalgebra's Schur form.
//!
//! Everything here operates on `m × m` matrices with `m` tiny (the component
//! count of the local system). Spectral projectors are computed contour-free
//! from a reordered Schur factorization and a triangular Sylvester solve, so
//! they stay meaningful (if large) for Jordan-like blocks where an
//! eigenvector basis is ill-conditioned; matrix exponentials fall back to
//! Padé scaling-and-squaring on the Schur blocks in that regime.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("Schur iteration failed to converge for a {0}x{0} matrix")]
    SchurFailed(usize),
    #[error("matrix is numerically singular")]
    Singular,
    #[error("Sylvester solve hit a shared eigenvalue between blocks")]
    SharedEigenvalue,
}

/// Complex Schur decomposition `A = Q T Q^H`, `T` upper triangular.
pub fn schur(a: &CMat) -> Result<(CMat, CMat), LinalgError> {
    let n = a.nrows();
    if n == 0 {
        return Ok((a.clone(), a.clone()));
    }
    if n == 1 {
        return Ok((CMat::identity(1, 1), a.clone()));
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), 1e-14, 100_000)
        .ok_or(LinalgError::SchurFailed(n))?;
    let (q, t) = schur.unpack();
    Ok((q, t))
}

pub fn diag_of(t: &CMat) -> Vec<Complex64> {
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Unitary similarity swapping the diagonal entries at `(i, i+1)` of an
/// upper-triangular `T`, accumulated into `Q`.
fn swap_adjacent(t: &mut CMat, q: &mut CMat, i: usize) {
    let n = t.nrows();
    let a = t[(i, i)];
    let b = t[(i, i + 1)];
    let d = t[(i + 1, i + 1)];
    // Eigenvector of [[a, b], [0, d]] for eigenvalue d.
    let v = (b, d - a);
    let r = (v.0.norm_sqr() + v.1.norm_sqr()).sqrt();
    let (c, s) = if r == 0.0 {
        // Repeated eigenvalue on a diagonal block: plain permutation.
        (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    } else {
        (v.0 / r, v.1 / r)
    };
    // G = [[c, -s̄], [s, c̄]]; apply G^H on rows i, i+1 and G on columns.
    for j in 0..n {
        let x = t[(i, j)];
        let y = t[(i + 1, j)];
        t[(i, j)] = c.conj() * x + s.conj() * y;
        t[(i + 1, j)] = -s * x + c * y;
    }
    for l in 0..n {
        let x = t[(l, i)];
        let y = t[(l, i + 1)];
        t[(l, i)] = x * c + y * s;
        t[(l, i + 1)] = -x * s.conj() + y * c.conj();
        let qx = q[(l, i)];
        let qy = q[(l, i + 1)];
        q[(l, i)] = qx * c + qy * s;
        q[(l, i + 1)] = -qx * s.conj() + qy * c.conj();
    }
    t[(i + 1, i)] = Complex64::default();
}

/// Reorder a Schur pair so the selected eigenvalues lead. Returns the
/// reordered pair and the selected count; `select` is aligned with the
/// current diagonal order.
pub fn reorder_schur(q: &CMat, t: &CMat, select: &[bool]) -> (CMat, CMat, usize) {
    let mut q = q.clone();
    let mut t = t.clone();
    let mut sel = select.to_vec();
    let n = sel.len();
    loop {
        let swap_at = (0..n.saturating_sub(1)).find(|&i| !sel[i] && sel[i + 1]);
        match swap_at {
            Some(i) => {
                swap_adjacent(&mut t, &mut q, i);
                sel.swap(i, i + 1);
            }
            None => break,
        }
    }
    let p = sel.iter().filter(|&&s| s).count();
    (q, t, p)
}

/// Solve `T11 Y − Y T22 = T12` with both blocks upper triangular.
pub fn sylvester_triangular(
    t11: &CMat,
    t22: &CMat,
    t12: &CMat,
) -> Result<CMat, LinalgError> {
    let p = t11.nrows();
    let q = t22.nrows();
    let scale = t11.norm().max(t22.norm()).max(1.0);
    let mut y = CMat::zeros(p, q);
    for i in (0..p).rev() {
        for j in 0..q {
            let mut rhs = t12[(i, j)];
            for l in i + 1..p {
                rhs -= t11[(i, l)] * y[(l, j)];
            }
            for l in 0..j {
                rhs += y[(i, l)] * t22[(l, j)];
            }
            let denom = t11[(i, i)] - t22[(j, j)];
            if denom.norm() < 1e-300 * scale {
                return Err(LinalgError::SharedEigenvalue);
            }
            y[(i, j)] = rhs / denom;
        }
    }
    Ok(y)
}

/// Spectral projector onto the invariant subspace of the selected
/// eigenvalues, along the complementary one: `P = Q [[I, Y], [0, 0]] Q^H`.
pub fn spectral_projector(q: &CMat, t: &CMat, select: &[bool]) -> Result<CMat, LinalgError> {
    let n = t.nrows();
    let (qo, to, p) = reorder_schur(q, t, select);
    if p == 0 {
        return Ok(CMat::zeros(n, n));
    }
    if p == n {
        return Ok(CMat::identity(n, n));
    }
    let t11 = to.view((0, 0), (p, p)).into_owned();
    let t22 = to.view((p, p), (n - p, n - p)).into_owned();
    let t12 = to.view((0, p), (p, n - p)).into_owned();
    let y = sylvester_triangular(&t11, &t22, &t12)?;
    let mut pi = CMat::zeros(n, n);
    for i in 0..p {
        pi[(i, i)] = Complex64::new(1.0, 0.0);
        for j in 0..n - p {
            pi[(i, p + j)] = y[(i, j)];
        }
    }
    Ok(&qo * pi * qo.adjoint())
}

/// Apply a scalar spectral function to the selected block through the
/// ordered Schur form: `f(A)·P_sel = Q [[f(T11), f(T11) Y], [0, 0]] Q^H`.
/// `block_fn` evaluates the matrix function on the leading block.
pub fn spectral_fn_times_projector(
    q: &CMat,
    t: &CMat,
    select: &[bool],
    block_fn: impl Fn(&CMat) -> CMat,
) -> Result<CMat, LinalgError> {
    let n = t.nrows();
    let (qo, to, p) = reorder_schur(q, t, select);
    if p == 0 {
        return Ok(CMat::zeros(n, n));
    }
    let t11 = to.view((0, 0), (p, p)).into_owned();
    let f11 = block_fn(&t11);
    let mut top = CMat::zeros(n, n);
    if p == n {
        top = f11;
    } else {
        let t22 = to.view((p, p), (n - p, n - p)).into_owned();
        let t12 = to.view((0, p), (p, n - p)).into_owned();
        let y = sylvester_triangular(&t11, &t22, &t12)?;
        let f11y = &f11 * &y;
        for i in 0..p {
            for j in 0..p {
                top[(i, j)] = f11[(i, j)];
            }
            for j in 0..n - p {
                top[(i, p + j)] = f11y[(i, j)];
            }
        }
    }
    Ok(&qo * top * qo.adjoint())
}

/// Right eigenvectors from a Schur pair by triangular back-substitution;
/// column `i` belongs to `T[(i,i)]`. Near-defective matrices yield a badly
/// conditioned basis, which callers detect via [`condition_2`].
pub fn eigenvectors_from_schur(q: &CMat, t: &CMat) -> CMat {
    let n = t.nrows();
    let tnorm = t.norm().max(1.0);
    // Keep the floor large enough that norm_sqr in the complex division
    // cannot underflow.
    let smlnum = 1e-120 * tnorm;
    let mut v = CMat::zeros(n, n);
    for i in 0..n {
        let lambda = t[(i, i)];
        let mut x = vec![Complex64::default(); n];
        x[i] = Complex64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let mut acc = Complex64::default();
            for l in j + 1..=i {
                acc += t[(j, l)] * x[l];
            }
            if acc == Complex64::default() {
                continue;
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < smlnum {
                denom = Complex64::new(smlnum, 0.0);
            }
            x[j] = -acc / denom;
        }
        let col = CVec::from_vec(x);
        let norm = col.norm();
        v.set_column(i, &(col / Complex64::new(norm, 0.0)));
    }
    q * v
}

/// One-norm (max column sum of moduli).
fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Operator 2-norm (largest singular value).
pub fn op_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.max()
}

/// 2-norm condition number of a basis matrix; infinite when singular.
pub fn condition_2(v: &CMat) -> f64 {
    let sv = v.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if smin <= 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

pub fn invert(a: &CMat) -> Result<CMat, LinalgError> {
    a.clone().try_inverse().ok_or(LinalgError::Singular)
}

/// Matrix exponential by [13/13] Padé approximation with scaling and
/// squaring.
pub fn expm(a: &CMat) -> CMat {
    const THETA13: f64 = 5.371920351148152;
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = one_norm(a);
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scaled = a * Complex64::new(0.5f64.powi(s), 0.0);

    let id = CMat::identity(n, n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let cb = |x: f64| Complex64::new(x, 0.0);
    let u_inner = &a6 * (&a6 * cb(B[13]) + &a4 * cb(B[11]) + &a2 * cb(B[9]))
        + &a6 * cb(B[7])
        + &a4 * cb(B[5])
        + &a2 * cb(B[3])
        + &id * cb(B[1]);
    let u = &scaled * u_inner;
    let v = &a6 * (&a6 * cb(B[12]) + &a4 * cb(B[10]) + &a2 * cb(B[8]))
        + &a6 * cb(B[6])
        + &a4 * cb(B[4])
        + &a2 * cb(B[2])
        + &id * cb(B[0]);

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut e = lhs.lu().solve(&rhs).expect("Padé denominator is nonsingular");
    for _ in 0..s {
        e = &e * &e;
    }
    e
}

/// `(φ₁(A), φ₂(A))` with `φ₁(z) = (e^z−1)/z`, `φ₂(z) = (e^z−1−z)/z²`,
/// via the augmented-matrix exponential; robust for any spectrum.
pub fn phi12(a: &CMat) -> (CMat, CMat) {
    let m = a.nrows();
    let mut w = CMat::zeros(3 * m, 3 * m);
    for i in 0..m {
        for j in 0..m {
            w[(i, j)] = a[(i, j)];
        }
        w[(i, m + i)] = Complex64::new(1.0, 0.0);
        w[(m + i, 2 * m + i)] = Complex64::new(1.0, 0.0);
    }
    let e = expm(&w);
    let phi1 = e.view((0, m), (m, m)).into_owned();
    let phi2 = e.view((0, 2 * m), (m, m)).into_owned();
    (phi1, phi2)
}

/// Scalar `φ₁`, series-switched near zero.
pub fn phi1_scalar(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for n in 1..24 {
            term = term * z / Complex64::new((n + 1) as f64, 0.0);
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Scalar `φ₂`, series-switched near zero.
pub fn phi2_scalar(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = Complex64::new(0.5, 0.0);
        let mut sum = term;
        for n in 1..24 {
            term = term * z / Complex64::new((n + 2) as f64, 0.0);
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_cmat(n: usize, seed: u64) -> CMat {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        CMat::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn schur_reconstructs_and_is_triangular() {
        for seed in 0..5 {
            let a = random_cmat(4, seed);
            let (q, t) = schur(&a).unwrap();
            let err = (&q * &t * q.adjoint() - &a).norm();
            assert!(err < 1e-12, "reconstruction error {err}");
            for i in 0..4 {
                for j in 0..i {
                    assert!(t[(i, j)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn reorder_moves_selected_eigenvalues_first() {
        let a = random_cmat(5, 7);
        let (q, t) = schur(&a).unwrap();
        let eigs = diag_of(&t);
        let select: Vec<bool> = eigs.iter().map(|l| l.re > 0.0).collect();
        let p_expected = select.iter().filter(|&&s| s).count();
        let (qo, to, p) = reorder_schur(&q, &t, &select);
        assert_eq!(p, p_expected);
        let err = (&qo * &to * qo.adjoint() - &a).norm();
        assert!(err < 1e-11, "similarity broken: {err}");
        for i in 0..p {
            assert!(to[(i, i)].re > 0.0);
        }
        for i in p..5 {
            assert!(to[(i, i)].re <= 0.0);
        }
    }

    #[test]
    fn projector_is_idempotent_and_commutes() {
        let a = random_cmat(4, 3);
        let (q, t) = schur(&a).unwrap();
        let select: Vec<bool> = diag_of(&t).iter().map(|l| l.im > 0.0).collect();
        let p = spectral_projector(&q, &t, &select).unwrap();
        assert!((&p * &p - &p).norm() < 1e-10);
        assert!((&a * &p - &p * &a).norm() < 1e-10);
        let trace: Complex64 = (0..4).map(|i| p[(i, i)]).sum();
        let expected = select.iter().filter(|&&s| s).count() as f64;
        assert!((trace - c(expected, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn eigenvectors_satisfy_the_eigen_equation() {
        let a = random_cmat(4, 11);
        let (q, t) = schur(&a).unwrap();
        let v = eigenvectors_from_schur(&q, &t);
        for (i, lambda) in diag_of(&t).into_iter().enumerate() {
            let col = v.column(i).into_owned();
            let res = (&a * &col - &col * lambda).norm();
            assert!(res < 1e-11, "eigvec residual {res}");
        }
    }

    #[test]
    fn expm_known_cases() {
        // Rotation generator: expm([[0, -θ], [θ, 0]]) is the rotation matrix.
        let theta = 0.7f64;
        let a = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(-theta, 0.0), c(theta, 0.0), c(0.0, 0.0)]);
        let e = expm(&a);
        assert!((e[(0, 0)] - c(theta.cos(), 0.0)).norm() < 1e-14);
        assert!((e[(0, 1)] - c(-theta.sin(), 0.0)).norm() < 1e-14);

        // Jordan block: expm([[λ, 1], [0, λ]]) = e^λ [[1, 1], [0, 1]].
        let l = c(0.3, -0.2);
        let j = CMat::from_row_slice(2, 2, &[l, c(1.0, 0.0), c(0.0, 0.0), l]);
        let ej = expm(&j);
        let el = l.exp();
        assert!((ej[(0, 0)] - el).norm() < 1e-13);
        assert!((ej[(0, 1)] - el).norm() < 1e-13);
        assert!(ej[(1, 0)].norm() < 1e-14);

        // Large norm exercises the squaring phase.
        let big = random_cmat(3, 2) * c(20.0, 0.0);
        let ebig = expm(&big);
        let ehalf = expm(&(big.clone() * c(0.5, 0.0)));
        assert!((&ehalf * &ehalf - &ebig).norm() / ebig.norm() < 1e-11);
    }

    #[test]
    fn phi_functions_match_scalar_series() {
        for &z in &[c(0.01, 0.02), c(-0.3, 0.1), c(2.0, -1.5), c(-40.0, 3.0)] {
            let a = CMat::from_row_slice(1, 1, &[z]);
            let (p1, p2) = phi12(&a);
            assert!((p1[(0, 0)] - phi1_scalar(z)).norm() < 1e-12 * (1.0 + phi1_scalar(z).norm()));
            assert!((p2[(0, 0)] - phi2_scalar(z)).norm() < 1e-12 * (1.0 + phi2_scalar(z).norm()));
        }
        // Identities at zero.
        assert!((phi1_scalar(c(0.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((phi2_scalar(c(0.0, 0.0)) - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn spectral_fn_projector_matches_eigen_route_for_normal_matrices() {
        // Hermitian test matrix: both routes are accurate; compare e^{At}P.
        let h = {
            let r = random_cmat(3, 21);
            (&r + r.adjoint()) * c(0.5, 0.0)
        };
        let (q, t) = schur(&h).unwrap();
        let eigs = diag_of(&t);
        let select: Vec<bool> = eigs.iter().map(|l| l.re > 0.0).collect();
        let tt = 0.4;
        let via_schur =
            spectral_fn_times_projector(&q, &t, &select, |b| expm(&(b * c(tt, 0.0)))).unwrap();
        let v = eigenvectors_from_schur(&q, &t);
        let vinv = invert(&v).unwrap();
        let mut d = CMat::zeros(3, 3);
        for (i, l) in eigs.iter().enumerate() {
            if select[i] {
                d[(i, i)] = (l * tt).exp();
            }
        }
        let via_eig = &v * d * vinv;
        assert!((via_schur - via_eig).norm() < 1e-11);
    }
}
