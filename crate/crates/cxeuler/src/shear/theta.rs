//! Single-mode phase reduction.
//!
//! With all energy in one real mode `k`, conservation of `E = q² + b_k²`
//! lets the system be written on the circle via `q = −√E cos θ`,
//! `b_k = √E sin θ`, where the phase obeys `∂_t θ = √E k sin θ`: a time
//! rescaling of `∂_t θ = sin θ` with an unstable fixed point at `θ = 0` and
//! a stable one at `θ = π`.

use super::ShearError;

/// Phase-space point of the single-mode reduction.
#[derive(Debug, Clone, Copy)]
pub struct ThetaState {
    /// Phase in `(−π, π]`.
    pub theta: f64,
    /// Conserved energy `E ≥ 0`.
    pub energy: f64,
    /// Mode number of the carrier.
    pub k: i32,
}

impl ThetaState {
    /// Reconstruction of the carried variables: `(q, b_k)`.
    pub fn reconstruct(&self) -> (f64, f64) {
        let amp = self.energy.sqrt();
        (-amp * self.theta.cos(), amp * self.theta.sin())
    }
}

/// `∂_t θ = √E k sin θ`.
pub fn theta_rhs(ts: &ThetaState) -> f64 {
    ts.energy.sqrt() * ts.k as f64 * ts.theta.sin()
}

/// Closed-form phase flow `θ(t) = 2 atan(e^{√E k t} tan(θ₀/2))` for
/// `θ₀ ∈ (0, π)`; the fixed points are handled separately by callers.
pub fn theta_closed_form(theta0: f64, energy: f64, k: i32, t: f64) -> Result<f64, ShearError> {
    if !(theta0 > 0.0 && theta0 < std::f64::consts::PI) {
        return Err(ShearError::ThetaOutOfRange(theta0));
    }
    let rate = energy.sqrt() * k as f64;
    Ok(2.0 * ((rate * t).exp() * (theta0 / 2.0).tan()).atan())
}
