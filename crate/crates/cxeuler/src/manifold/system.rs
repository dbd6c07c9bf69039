//! Local descriptions `∂_t u + F(u, ∂_x u) = 0` near a constant equilibrium.
//!
//! A [`LocalSystem`] packages the equilibrium `c`, the Jacobians
//! `A_u = ∂_u F(c,0)` and `A_p = ∂_p F(c,0)`, and the Taylor coefficients of
//! the analytic remainder `F̃` (total degree ≥ 2), so that the perturbation
//! `w = u − c` obeys `∂_t w − Lw = F̃(w, ∂_x w)` with
//! `−Lw = A_u w + A_p ∂_x w`. On the `k`-th Fourier mode,
//! `L_k = L₀ + k·𝐋` with `L₀ = −A_u` and `𝐋 = −i·A_p`; the construction
//! requires `𝐋` hyperbolic (no spectrum on the imaginary axis), which is
//! validated here.

use super::linalg::{diag_of, schur, CMat};
use super::ManifoldError;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// One monomial of the analytic remainder: coefficient vector of
/// `w^α (∂_x w)^β` across output components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorTerm {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    /// Output coefficients, one per component ("tensor" in the JSON schema).
    pub tensor: Vec<f64>,
}

impl TaylorTerm {
    pub fn degree(&self) -> u32 {
        self.alpha.iter().sum::<u32>() + self.beta.iter().sum::<u32>()
    }
}

/// The complexified pair `(L₀, 𝐋)` acting on Fourier modes. Constructible
/// directly for linear-analysis experiments that have no underlying real
/// nonlinearity.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub l0: CMat,
    pub ll: CMat,
}

impl Linearization {
    pub fn new(l0: CMat, ll: CMat) -> Result<Self, ManifoldError> {
        if l0.nrows() != l0.ncols() || ll.nrows() != ll.ncols() || l0.nrows() != ll.nrows() {
            return Err(ManifoldError::Shape("L0 and 𝐋 must be square of equal size".into()));
        }
        let lin = Self { l0, ll };
        lin.validate_hyperbolic()?;
        Ok(lin)
    }

    pub fn dim(&self) -> usize {
        self.ll.nrows()
    }

    /// Mode operator `L_k = L₀ + k𝐋`.
    pub fn mode_matrix(&self, k: i64) -> CMat {
        &self.l0 + &self.ll * Complex64::new(k as f64, 0.0)
    }

    /// Eigenvalues of `𝐋`; hyperbolicity requires them off the imaginary
    /// axis.
    pub fn transport_eigenvalues(&self) -> Result<Vec<Complex64>, ManifoldError> {
        let (_, t) = schur(&self.ll)?;
        Ok(diag_of(&t))
    }

    fn validate_hyperbolic(&self) -> Result<(), ManifoldError> {
        let eigs = self.transport_eigenvalues()?;
        for mu in &eigs {
            if mu.re.abs() <= 1e-9 {
                return Err(ManifoldError::NotHyperbolic { mu: *mu });
            }
        }
        Ok(())
    }

    /// Distinct eigenvalues of `𝐋` (duplicates merged within `tol`), the
    /// cluster centers for eigenvalue grouping.
    pub fn distinct_transport_eigenvalues(&self, tol: f64) -> Result<Vec<Complex64>, ManifoldError> {
        let eigs = self.transport_eigenvalues()?;
        let mut distinct: Vec<Complex64> = Vec::new();
        for e in eigs {
            if !distinct.iter().any(|d| (d - e).norm() <= tol) {
                distinct.push(e);
            }
        }
        Ok(distinct)
    }
}

/// Real-analytic local system at a constant equilibrium.
#[derive(Debug, Clone)]
pub struct LocalSystem {
    pub m: usize,
    pub equilibrium: Vec<f64>,
    pub a_u: DMatrix<f64>,
    pub a_p: DMatrix<f64>,
    pub taylor: Vec<TaylorTerm>,
    /// Radius of analyticity of `F̃`; infinite for polynomial remainders.
    pub rho: f64,
}

impl LocalSystem {
    pub fn new(
        equilibrium: Vec<f64>,
        a_u: DMatrix<f64>,
        a_p: DMatrix<f64>,
        taylor: Vec<TaylorTerm>,
        rho: f64,
    ) -> Result<Self, ManifoldError> {
        let m = equilibrium.len();
        if m == 0 {
            return Err(ManifoldError::Shape("empty equilibrium".into()));
        }
        if a_u.nrows() != m || a_u.ncols() != m || a_p.nrows() != m || a_p.ncols() != m {
            return Err(ManifoldError::Shape(format!(
                "Jacobians must be {m}x{m} to match the equilibrium"
            )));
        }
        for term in &taylor {
            if term.alpha.len() != m || term.beta.len() != m || term.tensor.len() != m {
                return Err(ManifoldError::Shape(
                    "Taylor term multi-indices and tensor must have length m".into(),
                ));
            }
            if term.degree() < 2 {
                return Err(ManifoldError::LowOrderTaylorTerm { degree: term.degree() });
            }
        }
        if !(rho > 0.0) {
            return Err(ManifoldError::Shape(format!("rho must be positive, got {rho}")));
        }
        let sys = Self { m, equilibrium, a_u, a_p, taylor, rho };
        // (A2) is checked eagerly so bad systems fail at construction.
        sys.linearization()?;
        Ok(sys)
    }

    /// `L₀ = −A_u`, `𝐋 = −i·A_p`, hyperbolicity validated.
    pub fn linearization(&self) -> Result<Linearization, ManifoldError> {
        let m = self.m;
        let l0 = CMat::from_fn(m, m, |i, j| Complex64::new(-self.a_u[(i, j)], 0.0));
        let ll = CMat::from_fn(m, m, |i, j| Complex64::new(0.0, -self.a_p[(i, j)]));
        Linearization::new(l0, ll)
    }

    /// The complex Burgers equation `∂_t u + 3u∂_x u = 0` embedded as a real
    /// 2-system at the equilibrium `u ≡ i`, i.e. `c = (0, 1)`. The remainder
    /// is the pure quadratic `F̃(w, p) = −3(w₁p₁ − w₂p₂, w₁p₂ + w₂p₁)`.
    pub fn burgers() -> Self {
        let a_u = DMatrix::zeros(2, 2);
        let a_p = DMatrix::from_row_slice(2, 2, &[0.0, -3.0, 3.0, 0.0]);
        let taylor = vec![
            TaylorTerm { alpha: vec![1, 0], beta: vec![1, 0], tensor: vec![-3.0, 0.0] },
            TaylorTerm { alpha: vec![0, 1], beta: vec![0, 1], tensor: vec![3.0, 0.0] },
            TaylorTerm { alpha: vec![1, 0], beta: vec![0, 1], tensor: vec![0.0, -3.0] },
            TaylorTerm { alpha: vec![0, 1], beta: vec![1, 0], tensor: vec![0.0, -3.0] },
        ];
        Self::new(vec![0.0, 1.0], a_u, a_p, taylor, f64::INFINITY)
            .expect("the Burgers embedding satisfies the construction hypotheses")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mat = |a: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect()
        };
        serde_json::json!({
            "m": self.m,
            "c": self.equilibrium,
            "A_u": mat(&self.a_u),
            "A_p": mat(&self.a_p),
            "taylor": self.taylor,
            "rho": if self.rho.is_finite() { serde_json::json!(self.rho) } else { serde_json::Value::Null },
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, ManifoldError> {
        #[derive(Deserialize)]
        struct SystemJson {
            m: usize,
            c: Vec<f64>,
            #[serde(rename = "A_u")]
            a_u: Vec<Vec<f64>>,
            #[serde(rename = "A_p")]
            a_p: Vec<Vec<f64>>,
            taylor: Vec<TaylorTerm>,
            #[serde(default)]
            rho: Option<f64>,
        }
        let parsed: SystemJson = serde_json::from_value(value.clone())
            .map_err(|e| ManifoldError::Shape(format!("malformed system JSON: {e}")))?;
        let m = parsed.m;
        if parsed.c.len() != m {
            return Err(ManifoldError::Shape("c must have length m".into()));
        }
        let to_mat = |rows: &Vec<Vec<f64>>, name: &str| -> Result<DMatrix<f64>, ManifoldError> {
            if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                return Err(ManifoldError::Shape(format!("{name} must be {m}x{m}")));
            }
            Ok(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
        };
        Self::new(
            parsed.c,
            to_mat(&parsed.a_u, "A_u")?,
            to_mat(&parsed.a_p, "A_p")?,
            parsed.taylor,
            parsed.rho.unwrap_or(f64::INFINITY),
        )
    }
}

/// Characteristic roots `λ = a ± √(4a² + 3b²)` of the geometrically
/// complexified Burgers system written in `(Re u, Im u)`: real for every
/// `(a, b)` and coincident only at the umbilical point `(0, 0)`.
pub fn geometric_burgers_hyperbolicity(a: f64, b: f64) -> [f64; 2] {
    let root = (4.0 * a * a + 3.0 * b * b).sqrt();
    [a + root, a - root]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burgers_linearization_has_eigenvalues_pm3() {
        let sys = LocalSystem::burgers();
        let lin = sys.linearization().unwrap();
        assert!(lin.l0.norm() == 0.0);
        let mut eigs: Vec<f64> = lin
            .transport_eigenvalues()
            .unwrap()
            .iter()
            .map(|l| {
                assert!(l.im.abs() < 1e-12);
                l.re
            })
            .collect();
        eigs.sort_by(f64::total_cmp);
        assert!((eigs[0] + 3.0).abs() < 1e-12 && (eigs[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn non_hyperbolic_transport_rejected() {
        // A_p = I gives 𝐋 = −iI: spectrum on the imaginary axis.
        let r = LocalSystem::new(
            vec![0.0],
            DMatrix::zeros(1, 1),
            DMatrix::identity(1, 1),
            vec![],
            1.0,
        );
        assert!(matches!(r, Err(ManifoldError::NotHyperbolic { .. })));
    }

    #[test]
    fn low_order_taylor_terms_rejected() {
        let term = TaylorTerm { alpha: vec![1, 0], beta: vec![0, 0], tensor: vec![1.0, 0.0] };
        let r = LocalSystem::new(
            vec![0.0, 1.0],
            DMatrix::zeros(2, 2),
            DMatrix::from_row_slice(2, 2, &[0.0, -3.0, 3.0, 0.0]),
            vec![term],
            1.0,
        );
        assert!(matches!(r, Err(ManifoldError::LowOrderTaylorTerm { degree: 1 })));
    }

    #[test]
    fn system_json_round_trip() {
        let sys = LocalSystem::burgers();
        let back = LocalSystem::from_json(&sys.to_json()).unwrap();
        assert_eq!(back.m, 2);
        assert_eq!(back.equilibrium, vec![0.0, 1.0]);
        assert_eq!(back.a_p, sys.a_p);
        assert_eq!(back.taylor, sys.taylor);
        assert!(back.rho.is_infinite());
    }

    #[test]
    fn hyperbolicity_roots() {
        let sqrt3 = 3.0f64.sqrt();
        let r = geometric_burgers_hyperbolicity(0.0, 1.0);
        assert!((r[0] - sqrt3).abs() < 1e-12 && (r[1] + sqrt3).abs() < 1e-12);
        assert_eq!(geometric_burgers_hyperbolicity(0.0, 0.0), [0.0, 0.0]);
        let r = geometric_burgers_hyperbolicity(1.0, 0.0);
        assert!((r[0] - 3.0).abs() < 1e-12 && (r[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn hyperbolicity_random_sweep() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10_000 {
            let a: f64 = rng.gen_range(-10.0..10.0);
            let b: f64 = rng.gen_range(-10.0..10.0);
            let [l1, l2] = geometric_burgers_hyperbolicity(a, b);
            assert!(l1.is_finite() && l2.is_finite());
            // Roots solve λ² − 2aλ − 3(a² + b²) = 0.
            for l in [l1, l2] {
                let res = l * l - 2.0 * a * l - 3.0 * (a * a + b * b);
                assert!(res.abs() <= 1e-10 * (1.0 + l * l));
            }
            if (a, b) != (0.0, 0.0) {
                assert!(l1 > l2, "coincident roots away from the umbilical point");
            }
        }
    }
}
