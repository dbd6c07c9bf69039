//! Per-wavenumber mode operators, dichotomy projections, eigenvalue groups,
//! and measured semigroup constants.
//!
//! For `|k| → ∞` the spectrum scales like `σ(L_k) = k σ(𝐋 + k⁻¹L₀)`: each
//! eigenvalue of `L_k` tracks an eigenvalue `μ` of `𝐋`. Eigenvalues of
//! `𝐋 + εL₀` clustering to the same `μ` form its eigenvalue group; the group
//! eigenspace is the sum of their spectral subspaces, and modified dichotomy
//! projections refuse to split a group that straddles the threshold line
//! `Re λ = γ` (Jordan structure may split non-smoothly, making the split
//! projections unbounded).

use super::linalg::{
    condition_2, diag_of, eigenvectors_from_schur, expm, invert, op_norm, phi12, phi1_scalar,
    phi2_scalar, schur, spectral_fn_times_projector, spectral_projector, CMat,
};
use super::system::Linearization;
use super::ManifoldError;
use num_complex::Complex64;

/// Eigenvector-basis conditioning beyond which propagators switch from the
/// eigendecomposition to Schur-block exponentials.
pub const EIGENBASIS_COND_LIMIT: f64 = 1e6;

/// Minimum distance an eigenvalue may sit from a dichotomy threshold.
pub const DEFAULT_AXIS_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
struct EigenBasis {
    v: CMat,
    v_inv: CMat,
}

/// `L_k = L₀ + k𝐋` with its Schur form, eigenvalues, threshold-`γ`
/// dichotomy projections, and (when well-conditioned) an eigenvector basis.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    pub k: i64,
    pub gamma: f64,
    pub matrix: CMat,
    pub eigenvalues: Vec<Complex64>,
    pub p_u: CMat,
    pub p_cs: CMat,
    pub unstable_count: usize,
    /// 2-norm conditioning of the eigenvector basis.
    pub eigen_condition: f64,
    schur_q: CMat,
    schur_t: CMat,
    eigen: Option<EigenBasis>,
}

/// Assemble the mode operator at wavenumber `k` with dichotomy threshold
/// `γ`: unstable block `Re λ > γ`, center-stable block `Re λ ≤ γ`.
pub fn assemble_mode_operator(
    lin: &Linearization,
    k: i64,
    gamma: f64,
) -> Result<ModeOperator, ManifoldError> {
    assemble_with_axis_tol(lin, k, gamma, DEFAULT_AXIS_TOL)
}

pub fn assemble_with_axis_tol(
    lin: &Linearization,
    k: i64,
    gamma: f64,
    axis_tol: f64,
) -> Result<ModeOperator, ManifoldError> {
    let matrix = lin.mode_matrix(k);
    let (q, t) = schur(&matrix)?;
    let eigenvalues = diag_of(&t);
    for lambda in &eigenvalues {
        if (lambda.re - gamma).abs() <= axis_tol {
            return Err(ManifoldError::ThresholdOnSpectrum { k, gamma, lambda: *lambda });
        }
    }
    let sel_u: Vec<bool> = eigenvalues.iter().map(|l| l.re > gamma).collect();
    let p_u = spectral_projector(&q, &t, &sel_u)?;
    let n = matrix.nrows();
    let p_cs = CMat::identity(n, n) - &p_u;

    let v = eigenvectors_from_schur(&q, &t);
    let eigen_condition = condition_2(&v);
    let eigen = if eigen_condition <= EIGENBASIS_COND_LIMIT {
        let v_inv = invert(&v)?;
        Some(EigenBasis { v, v_inv })
    } else {
        None
    };

    Ok(ModeOperator {
        k,
        gamma,
        matrix,
        unstable_count: sel_u.iter().filter(|&&s| s).count(),
        eigenvalues,
        p_u,
        p_cs,
        eigen_condition,
        schur_q: q,
        schur_t: t,
        eigen,
    })
}

impl ModeOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Selection mask over this operator's eigenvalue order.
    pub fn select(&self, pred: impl Fn(Complex64) -> bool) -> Vec<bool> {
        self.eigenvalues.iter().map(|&l| pred(l)).collect()
    }

    pub fn select_unstable(&self) -> Vec<bool> {
        self.select(|l| l.re > self.gamma)
    }

    /// Smallest distance of the spectrum's real parts to `level`.
    pub fn threshold_clearance(&self, level: f64) -> f64 {
        self.eigenvalues.iter().map(|l| (l.re - level).abs()).fold(f64::INFINITY, f64::min)
    }

    /// Spectral projector onto the selected eigenvalues.
    pub fn projector(&self, select: &[bool]) -> Result<CMat, ManifoldError> {
        Ok(spectral_projector(&self.schur_q, &self.schur_t, select)?)
    }

    fn eigen_apply(
        &self,
        basis: &EigenBasis,
        select: &[bool],
        f: impl Fn(Complex64) -> Complex64,
    ) -> CMat {
        let n = self.dim();
        let mut d = CMat::zeros(n, n);
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            if select[i] {
                d[(i, i)] = f(l);
            }
        }
        &basis.v * d * &basis.v_inv
    }

    /// `e^{L_k t} P_sel`, computed through the eigenbasis or, for
    /// ill-conditioned bases, through the reordered Schur block exponential.
    /// Stable whenever the selected spectrum decays in the direction of `t`.
    pub fn propagator(&self, t: f64, select: &[bool]) -> Result<CMat, ManifoldError> {
        match &self.eigen {
            Some(basis) => Ok(self.eigen_apply(basis, select, |l| (l * t).exp())),
            None => Ok(spectral_fn_times_projector(&self.schur_q, &self.schur_t, select, |b| {
                expm(&(b * Complex64::new(t, 0.0)))
            })?),
        }
    }

    /// Quadrature weights for one uniform-grid interval of the exponential
    /// integrator: the pair `(h·φ₂(σhL)P_sel, h·(φ₁−φ₂)(σhL)P_sel)` scaling
    /// the near and far endpoint samples, with `σ = ±1` the integration
    /// direction.
    pub fn quad_weights(
        &self,
        h: f64,
        sigma: f64,
        select: &[bool],
    ) -> Result<(CMat, CMat), ManifoldError> {
        let hc = Complex64::new(h, 0.0);
        match &self.eigen {
            Some(basis) => {
                let w_near = self.eigen_apply(basis, select, |l| {
                    hc * phi2_scalar(l * sigma * h)
                });
                let w_far = self.eigen_apply(basis, select, |l| {
                    let z = l * sigma * h;
                    hc * (phi1_scalar(z) - phi2_scalar(z))
                });
                Ok((w_near, w_far))
            }
            None => {
                let w_near =
                    spectral_fn_times_projector(&self.schur_q, &self.schur_t, select, |b| {
                        let (_, p2) = phi12(&(b * Complex64::new(sigma * h, 0.0)));
                        p2 * hc
                    })?;
                let w_far =
                    spectral_fn_times_projector(&self.schur_q, &self.schur_t, select, |b| {
                        let (p1, p2) = phi12(&(b * Complex64::new(sigma * h, 0.0)));
                        (p1 - p2) * hc
                    })?;
                Ok((w_near, w_far))
            }
        }
    }
}

/// Eigenvalue groups of `𝐋 + k⁻¹L₀`: each eigenvalue is assigned to the
/// nearest eigenvalue `μ` of `𝐋` when unambiguously within `group_radius`.
#[derive(Debug, Clone)]
pub struct EigenvalueGroups {
    pub k: i64,
    /// Distinct eigenvalues of `𝐋`.
    pub mus: Vec<Complex64>,
    /// `(eigenvalue of L_k, index into mus)` pairs.
    pub assignments: Vec<(Complex64, usize)>,
    /// Group eigenspace projectors, summing to the identity.
    pub projectors: Vec<CMat>,
}

/// Cluster the eigenvalues of `𝐋 + k⁻¹L₀` to the spectrum of `𝐋`.
///
/// Fails with [`ManifoldError::BelowGroupCutoff`] when some eigenvalue is
/// not within `group_radius` of any `μ`, or when two `μ` compete for it
/// (both within `2·group_radius`).
pub fn eigenvalue_groups(
    lin: &Linearization,
    k: i64,
    group_radius: f64,
) -> Result<EigenvalueGroups, ManifoldError> {
    if k == 0 {
        return Err(ManifoldError::BelowGroupCutoff {
            k,
            reason: "eigenvalue groups are defined through 𝐋 + k⁻¹L₀".into(),
        });
    }
    let mus = lin.distinct_transport_eigenvalues(1e-9)?;
    let perturbed = &lin.ll + &lin.l0 * Complex64::new(1.0 / k as f64, 0.0);
    let (q, t) = schur(&perturbed)?;
    let eigs = diag_of(&t);

    let mut labels = Vec::with_capacity(eigs.len());
    for &e in &eigs {
        let mut dists: Vec<(usize, f64)> =
            mus.iter().enumerate().map(|(i, mu)| (i, (mu - e).norm())).collect();
        dists.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (nearest, d1) = dists[0];
        if d1 > group_radius {
            return Err(ManifoldError::BelowGroupCutoff {
                k,
                reason: format!("eigenvalue {e} is {d1:.3e} from the nearest group center"),
            });
        }
        if let Some(&(_, d2)) = dists.get(1) {
            if d2 <= 2.0 * group_radius {
                return Err(ManifoldError::BelowGroupCutoff {
                    k,
                    reason: format!(
                        "eigenvalue {e} sits between two group centers ({d1:.3e}, {d2:.3e})"
                    ),
                });
            }
        }
        labels.push(nearest);
    }

    let mut projectors = Vec::with_capacity(mus.len());
    for mu_idx in 0..mus.len() {
        let select: Vec<bool> = labels.iter().map(|&l| l == mu_idx).collect();
        projectors.push(spectral_projector(&q, &t, &select)?);
    }
    let kf = Complex64::new(k as f64, 0.0);
    let assignments = eigs.iter().zip(&labels).map(|(&e, &l)| (kf * e, l)).collect();
    Ok(EigenvalueGroups { k, mus, assignments, projectors })
}

/// Modified dichotomy at threshold `γ`: group-wise agreement with the plain
/// projections, except that a group straddling (or touching) the line
/// `Re λ = γ` is assigned wholesale to the center-stable side.
#[derive(Debug, Clone)]
pub struct ModifiedSplit {
    pub p_u: CMat,
    pub p_cs: CMat,
    /// Selection mask over the operator's eigenvalue order.
    pub unstable_selection: Vec<bool>,
    /// True when grouping was unavailable (small `|k|`) and the plain
    /// projections were used.
    pub plain_fallback: bool,
}

/// Build the modified projections for `op`, clustering its eigenvalues via
/// `λ/k` against the transport spectrum. Small `|k|` (ambiguous clustering)
/// falls back to the plain projections at the same threshold.
pub fn modified_projection(
    lin: &Linearization,
    op: &ModeOperator,
    gamma: f64,
    group_radius: f64,
) -> Result<ModifiedSplit, ManifoldError> {
    let n = op.dim();
    let plain = |op: &ModeOperator| -> Result<ModifiedSplit, ManifoldError> {
        let sel = op.select(|l| l.re > gamma);
        let p_u = op.projector(&sel)?;
        Ok(ModifiedSplit {
            p_cs: CMat::identity(n, n) - &p_u,
            p_u,
            unstable_selection: sel,
            plain_fallback: true,
        })
    };
    if op.k == 0 {
        return plain(op);
    }
    let mus = lin.distinct_transport_eigenvalues(1e-9)?;
    let kf = op.k as f64;
    // Assign each eigenvalue of L_k to the nearest group center via λ/k.
    let mut labels = Vec::with_capacity(n);
    for &l in &op.eigenvalues {
        let scaled = l / kf;
        let mut dists: Vec<(usize, f64)> =
            mus.iter().enumerate().map(|(i, mu)| (i, (mu - scaled).norm())).collect();
        dists.sort_by(|a, b| a.1.total_cmp(&b.1));
        let ambiguous = dists[0].1 > group_radius
            || dists.get(1).is_some_and(|&(_, d2)| d2 <= 2.0 * group_radius);
        if ambiguous {
            return plain(op);
        }
        labels.push(dists[0].0);
    }
    // A group is unstable only if every member clears the threshold.
    let mut group_unstable = vec![true; mus.len()];
    let mut group_seen = vec![false; mus.len()];
    for (&l, &g) in op.eigenvalues.iter().zip(&labels) {
        group_seen[g] = true;
        if l.re <= gamma {
            group_unstable[g] = false;
        }
    }
    let sel: Vec<bool> =
        labels.iter().map(|&g| group_seen[g] && group_unstable[g]).collect();
    let p_u = op.projector(&sel)?;
    Ok(ModifiedSplit {
        p_cs: CMat::identity(n, n) - &p_u,
        p_u,
        unstable_selection: sel,
        plain_fallback: false,
    })
}

/// Measured semigroup constants: the suprema over sampled `(k, t)` of
/// `‖e^{L_k t}P_u‖ e^{−(γ+ν|k|)t}` for `t ≤ 0` and
/// `‖e^{L_k t}P_cs‖ e^{−(γ−ν|k|)t}` for `t ≥ 0`.
#[derive(Debug, Clone)]
pub struct SemigroupReport {
    pub c_u: f64,
    pub c_cs: f64,
    /// `(k, sup over t of the weighted backward norm, forward norm)`.
    pub per_k: Vec<(i64, f64, f64)>,
    pub gamma: f64,
    pub nu: f64,
}

/// Evaluate the dichotomy semigroup bounds over `k ∈ [−k_max, k_max]` and
/// `|t| ≤ t_max`. Unbounded growth along `k` means `ν` exceeds what the
/// system supports and is reported as an error.
pub fn semigroup_bound_check(
    lin: &Linearization,
    gamma: f64,
    nu: f64,
    k_max: i64,
    t_max: f64,
    t_samples: usize,
) -> Result<SemigroupReport, ManifoldError> {
    if !(gamma > 0.0) || !(nu > 0.0) || !(t_max > 0.0) || t_samples < 2 {
        return Err(ManifoldError::InvalidParams(
            "semigroup check needs positive gamma, nu, t_max and at least 2 samples".into(),
        ));
    }
    let mut per_k = Vec::new();
    let mut c_u = 0.0f64;
    let mut c_cs = 0.0f64;
    for k in -k_max..=k_max {
        let op = assemble_mode_operator(lin, k, gamma)?;
        let sel_u = op.select_unstable();
        let sel_cs: Vec<bool> = sel_u.iter().map(|s| !s).collect();
        let mut worst_u = 0.0f64;
        let mut worst_cs = 0.0f64;
        for i in 0..t_samples {
            let t = t_max * i as f64 / (t_samples - 1) as f64;
            // Backward: weight e^{-(γ+ν|k|)·(−t)} = e^{(γ+ν|k|)t}.
            let back = op.propagator(-t, &sel_u)?;
            let wu = op_norm(&back) * ((gamma + nu * k.abs() as f64) * t).exp();
            worst_u = worst_u.max(wu);
            let fwd = op.propagator(t, &sel_cs)?;
            let wcs = op_norm(&fwd) * (-(gamma - nu * k.abs() as f64) * t).exp();
            worst_cs = worst_cs.max(wcs);
        }
        per_k.push((k, worst_u, worst_cs));
        c_u = c_u.max(worst_u);
        c_cs = c_cs.max(worst_cs);
    }
    if !c_u.is_finite() || !c_cs.is_finite() {
        return Err(ManifoldError::NuTooLarge { nu, c_u, c_cs });
    }
    // Divergence along |k|: compare the outer quartile against the inner one.
    let quartile = (k_max / 4).max(1);
    let inner = per_k
        .iter()
        .filter(|(k, _, _)| k.abs() <= quartile)
        .map(|&(_, a, b)| a.max(b))
        .fold(0.0f64, f64::max);
    let outer = per_k
        .iter()
        .filter(|(k, _, _)| k.abs() >= k_max - quartile)
        .map(|&(_, a, b)| a.max(b))
        .fold(0.0f64, f64::max);
    if outer > 100.0 * inner.max(1.0) {
        return Err(ManifoldError::NuTooLarge { nu, c_u, c_cs });
    }
    Ok(SemigroupReport { c_u, c_cs, per_k, gamma, nu })
}
