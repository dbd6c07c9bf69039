//! Fourier-space fields on the torus and analytic-norm machinery.
//!
//! A [`FourierField`] is a finite set of integer wavevectors `k` with complex
//! coefficients, representing `u(x) = Σ_k û(k) e^{ik·x}` on the 1- or 2-torus.
//! Absent wavevectors are semantically zero. Fields are immutable values once
//! built; every operation here is a pure function.
//!
//! The norms are the Wiener-algebra family
//! `‖u‖_{A^{r,s}} = Σ_k ⟨k⟩^s e^{r|k|} |û(k)|` (a Banach algebra under
//! pointwise multiplication for `r ≥ 0`) and the Sobolev family
//! `‖u‖_{H^s} = (Σ_k ⟨k⟩^{2s} |û(k)|²)^{1/2}`, with `⟨k⟩ = (1+|k|²)^{1/2}`
//! throughout.
//!
//! ```
//! use cxeuler::fourier::{FourierField, NormSpec};
//! use num_complex::Complex64;
//!
//! // f = e^{ix} + e^{-ix} = 2 cos x, stored as two modes on the 1-torus.
//! let mut f = FourierField::scalar_1d(8);
//! f.set1(1, Complex64::new(1.0, 0.0)).unwrap();
//! f.set1(-1, Complex64::new(1.0, 0.0)).unwrap();
//!
//! let a0 = NormSpec::wiener(0.0, 0.0).unwrap();
//! assert_eq!(f.norm(&a0), 2.0);
//!
//! // f² has coefficient 2 at k=0 and 1 at k=±2; the algebra inequality
//! // ‖f·f‖_{A^r} ≤ ‖f‖_{A^r}² holds with equality here.
//! let f2 = f.product(&f).unwrap();
//! assert_eq!(f2.coeff1(0).re, 2.0);
//! assert_eq!(f2.coeff1(2).re, 1.0);
//! assert!(f2.norm(&a0) <= f.norm(&a0) * f.norm(&a0) + 1e-12);
//! ```

mod radius;
mod serial;

pub use radius::{estimate_analyticity_radius, RADIUS_COEFF_FLOOR};

use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

/// Integer wavevector. For 1-D fields the second component is always zero.
pub type WaveVec = [i32; 2];

/// Errors from field construction and spectral operations.
#[derive(Debug, Error)]
pub enum FourierError {
    #[error("spatial dimension must be 1 or 2, got {0}")]
    InvalidDim(u8),
    #[error("component count must be >= 1")]
    InvalidComponents,
    #[error("norm parameters must be nonnegative: r = {r}, s = {s}")]
    NegativeNormParam { r: f64, s: f64 },
    #[error("wavevector {k:?} outside cutoff |k_i| <= {cutoff}")]
    WavevectorOutOfRange { k: WaveVec, cutoff: u32 },
    #[error("coefficient has {got} components, field has {expected}")]
    ComponentMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(u8, u8),
    #[error("operation requires scalar (single-component) fields")]
    NotScalar,
    #[error("axis {axis} invalid for dimension {dim}")]
    InvalidAxis { axis: usize, dim: u8 },
    #[error("radius undetermined: {usable} usable modes above the coefficient floor (need >= 3)")]
    RadiusUndetermined { usable: usize },
    #[error("field is not conjugate-symmetric: |coeff(-k) - conj(coeff(k))| = {defect} at k = {k:?}")]
    NotRealSymmetric { k: WaveVec, defect: f64 },
    #[error("malformed field JSON: {0}")]
    Json(String),
}

/// Which norm family a [`NormSpec`] selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// `A^{r,s}`: `Σ ⟨k⟩^s e^{r|k|} |û(k)|`.
    Wiener,
    /// `H^s`: `(Σ ⟨k⟩^{2s} |û(k)|²)^{1/2}`; `r` is ignored.
    Sobolev,
}

/// Validated norm parameters: analyticity radius `r ≥ 0`, derivative weight
/// `s ≥ 0`, and the norm family.
#[derive(Debug, Clone, Copy)]
pub struct NormSpec {
    r: f64,
    s: f64,
    kind: NormKind,
}

impl NormSpec {
    pub fn new(r: f64, s: f64, kind: NormKind) -> Result<Self, FourierError> {
        if !(r >= 0.0) || !(s >= 0.0) {
            return Err(FourierError::NegativeNormParam { r, s });
        }
        Ok(Self { r, s, kind })
    }

    pub fn wiener(r: f64, s: f64) -> Result<Self, FourierError> {
        Self::new(r, s, NormKind::Wiener)
    }

    pub fn sobolev(s: f64) -> Result<Self, FourierError> {
        Self::new(0.0, s, NormKind::Sobolev)
    }

    /// The `A^{0,1}` norm used as the smallness gauge in the manifold module.
    pub fn a01() -> Self {
        Self { r: 0.0, s: 1.0, kind: NormKind::Wiener }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }
}

/// `⟨k⟩ = (1 + |k|²)^{1/2}` for a scalar wavenumber.
pub fn bracket(k: f64) -> f64 {
    (1.0 + k * k).sqrt()
}

fn knorm(k: &WaveVec) -> f64 {
    let (a, b) = (k[0] as f64, k[1] as f64);
    (a * a + b * b).sqrt()
}

fn kbracket(k: &WaveVec) -> f64 {
    let (a, b) = (k[0] as f64, k[1] as f64);
    (1.0 + a * a + b * b).sqrt()
}

fn coeff_abs(c: &[Complex64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// A finite Fourier series on the 1- or 2-torus with `m ≥ 1` complex
/// components per mode and a rectangular cutoff `|k_i| ≤ K`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    dim: u8,
    cutoff: u32,
    components: usize,
    real_symmetric: bool,
    modes: BTreeMap<WaveVec, Vec<Complex64>>,
}

impl FourierField {
    pub fn new(dim: u8, cutoff: u32, components: usize) -> Result<Self, FourierError> {
        if dim != 1 && dim != 2 {
            return Err(FourierError::InvalidDim(dim));
        }
        if components == 0 {
            return Err(FourierError::InvalidComponents);
        }
        Ok(Self { dim, cutoff, components, real_symmetric: false, modes: BTreeMap::new() })
    }

    /// Empty scalar field on the 1-torus.
    pub fn scalar_1d(cutoff: u32) -> Self {
        Self::new(1, cutoff, 1).expect("valid")
    }

    /// Empty scalar field on the 2-torus.
    pub fn scalar_2d(cutoff: u32) -> Self {
        Self::new(2, cutoff, 1).expect("valid")
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Number of stored (nonzero) modes.
    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    fn check_k(&self, k: &WaveVec) -> Result<(), FourierError> {
        let kmax = self.cutoff as i32;
        let in_range = k[0].abs() <= kmax && k[1].abs() <= kmax && (self.dim == 2 || k[1] == 0);
        if in_range {
            Ok(())
        } else {
            Err(FourierError::WavevectorOutOfRange { k: *k, cutoff: self.cutoff })
        }
    }

    /// Store a coefficient vector at `k`. Exact zeros are dropped so that
    /// "absent means zero" stays canonical.
    pub fn set(&mut self, k: WaveVec, coeff: Vec<Complex64>) -> Result<(), FourierError> {
        self.check_k(&k)?;
        if coeff.len() != self.components {
            return Err(FourierError::ComponentMismatch {
                expected: self.components,
                got: coeff.len(),
            });
        }
        self.real_symmetric = false;
        if coeff.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
            self.modes.remove(&k);
        } else {
            self.modes.insert(k, coeff);
        }
        Ok(())
    }

    /// Scalar 1-D convenience: set the coefficient at wavenumber `k`.
    pub fn set1(&mut self, k: i32, coeff: Complex64) -> Result<(), FourierError> {
        if self.components != 1 {
            return Err(FourierError::NotScalar);
        }
        self.set([k, 0], vec![coeff])
    }

    pub fn get(&self, k: &WaveVec) -> Option<&[Complex64]> {
        self.modes.get(k).map(|v| v.as_slice())
    }

    /// Scalar coefficient at `k` (zero if absent).
    pub fn coeff(&self, k: &WaveVec) -> Complex64 {
        self.modes.get(k).map(|v| v[0]).unwrap_or_default()
    }

    /// Scalar 1-D convenience accessor.
    pub fn coeff1(&self, k: i32) -> Complex64 {
        self.coeff(&[k, 0])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&WaveVec, &Vec<Complex64>)> {
        self.modes.iter()
    }

    /// Extract one component as a scalar field.
    pub fn component(&self, idx: usize) -> Result<FourierField, FourierError> {
        if idx >= self.components {
            return Err(FourierError::ComponentMismatch { expected: self.components, got: idx });
        }
        let mut out = FourierField::new(self.dim, self.cutoff, 1)?;
        for (k, c) in &self.modes {
            out.set(*k, vec![c[idx]])?;
        }
        Ok(out)
    }

    /// `Σ_k ⟨k⟩^s e^{r|k|} |û(k)|` (Wiener) or `(Σ_k ⟨k⟩^{2s} |û(k)|²)^{1/2}`
    /// (Sobolev), with `|û(k)|` the Euclidean norm over components.
    pub fn norm(&self, spec: &NormSpec) -> f64 {
        match spec.kind {
            NormKind::Wiener => self
                .modes
                .iter()
                .map(|(k, c)| kbracket(k).powf(spec.s) * (spec.r * knorm(k)).exp() * coeff_abs(c))
                .sum(),
            NormKind::Sobolev => self
                .modes
                .iter()
                .map(|(k, c)| {
                    let w = kbracket(k).powf(spec.s);
                    let a = coeff_abs(c);
                    w * w * a * a
                })
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Discrete convolution `(fg)^(k) = Σ_j f̂(j) ĝ(k−j)`, Galerkin-truncated
    /// to the larger of the two cutoffs. Requires scalar inputs of equal
    /// dimension; componentwise products are built by callers.
    pub fn product(&self, other: &FourierField) -> Result<FourierField, FourierError> {
        if self.dim != other.dim {
            return Err(FourierError::DimensionMismatch(self.dim, other.dim));
        }
        if self.components != 1 || other.components != 1 {
            return Err(FourierError::NotScalar);
        }
        let cutoff = self.cutoff.max(other.cutoff);
        let kmax = cutoff as i32;
        let mut acc: BTreeMap<WaveVec, Complex64> = BTreeMap::new();
        for (j, a) in &self.modes {
            for (l, b) in &other.modes {
                let k = [j[0] + l[0], j[1] + l[1]];
                if k[0].abs() <= kmax && k[1].abs() <= kmax {
                    *acc.entry(k).or_default() += a[0] * b[0];
                }
            }
        }
        let mut out = FourierField::new(self.dim, cutoff, 1)?;
        for (k, v) in acc {
            out.set(k, vec![v])?;
        }
        Ok(out)
    }

    /// Coefficientwise multiplication by `i·k_axis`.
    pub fn derivative(&self, axis: usize) -> Result<FourierField, FourierError> {
        if axis >= self.dim as usize {
            return Err(FourierError::InvalidAxis { axis, dim: self.dim });
        }
        let mut out = FourierField::new(self.dim, self.cutoff, self.components)?;
        for (k, c) in &self.modes {
            let ik = Complex64::new(0.0, k[axis] as f64);
            if ik.im != 0.0 {
                out.set(*k, c.iter().map(|z| z * ik).collect())?;
            }
        }
        Ok(out)
    }

    /// `self + factor · other`, on the larger cutoff.
    pub fn add_scaled(&self, other: &FourierField, factor: Complex64) -> Result<FourierField, FourierError> {
        if self.dim != other.dim {
            return Err(FourierError::DimensionMismatch(self.dim, other.dim));
        }
        if self.components != other.components {
            return Err(FourierError::ComponentMismatch {
                expected: self.components,
                got: other.components,
            });
        }
        let mut out = FourierField::new(self.dim, self.cutoff.max(other.cutoff), self.components)?;
        for (k, c) in &self.modes {
            out.set(*k, c.clone())?;
        }
        for (k, c) in &other.modes {
            let mut v = out.modes.get(k).cloned().unwrap_or_else(|| vec![Complex64::default(); self.components]);
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi += factor * ci;
            }
            out.set(*k, v)?;
        }
        Ok(out)
    }

    pub fn scaled(&self, factor: Complex64) -> FourierField {
        let mut out = self.clone();
        out.real_symmetric = false;
        let keys: Vec<WaveVec> = out.modes.keys().copied().collect();
        for k in keys {
            if factor == Complex64::default() {
                out.modes.remove(&k);
            } else if let Some(c) = out.modes.get_mut(&k) {
                for z in c.iter_mut() {
                    *z *= factor;
                }
            }
        }
        out
    }

    /// Mode reflection `k → −k` (the spatial map `x → −x`).
    pub fn reflected(&self) -> FourierField {
        let mut out = FourierField::new(self.dim, self.cutoff, self.components).expect("valid");
        for (k, c) in &self.modes {
            out.set([-k[0], -k[1]], c.clone()).expect("in range");
        }
        out
    }

    /// Largest coefficient magnitude difference against `other` over the
    /// union of supports.
    pub fn max_abs_diff(&self, other: &FourierField) -> f64 {
        let mut worst = 0.0f64;
        for (k, c) in &self.modes {
            let o = other.get(k);
            for (i, z) in c.iter().enumerate() {
                let oz = o.map(|v| v[i]).unwrap_or_default();
                worst = worst.max((z - oz).norm());
            }
        }
        for (k, c) in &other.modes {
            if self.modes.contains_key(k) {
                continue;
            }
            for z in c {
                worst = worst.max(z.norm());
            }
        }
        worst
    }

    /// Checks the conjugate symmetry `coeff(−k) = conj(coeff(k))` of a
    /// real-valued function's spectrum.
    pub fn check_real_symmetry(&self, tol: f64) -> Result<(), FourierError> {
        for (k, c) in &self.modes {
            let neg = [-k[0], -k[1]];
            for (i, z) in c.iter().enumerate() {
                let mirrored = self.modes.get(&neg).map(|v| v[i]).unwrap_or_default();
                let defect = (mirrored - z.conj()).norm();
                if defect > tol {
                    return Err(FourierError::NotRealSymmetric { k: *k, defect });
                }
            }
        }
        Ok(())
    }

    /// Flag the field as real-valued after validating conjugate symmetry.
    pub fn flag_real(&mut self, tol: f64) -> Result<(), FourierError> {
        self.check_real_symmetry(tol)?;
        self.real_symmetric = true;
        Ok(())
    }

    pub fn is_flagged_real(&self) -> bool {
        self.real_symmetric
    }
}
