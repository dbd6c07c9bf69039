//! Spectral numerics for complex-valued Euler flows.
//!
//! The library has four mathematical layers and a batch runner:
//!
//! - [`fourier`]: sparse Fourier fields on the torus, Wiener-algebra and
//!   Sobolev norms, spectral products, and analyticity-radius estimation
//!   from coefficient decay.
//! - [`shear`]: the one-dimensional complex shear-flow reduction
//!   `∂_t q = Σ k|b_k|²`, `∂_t b_k = −q k b_k`, integrated with an exact
//!   per-mode integrating factor, plus the norm-inflation and
//!   loss-of-analyticity experiments it supports.
//! - [`euler2d`]: a pseudospectral solver for the two-dimensional complex
//!   Euler equations in vorticity form `∂_t ω + ū·∇ω = 0`, with Biot–Savart
//!   inversion, mean-flow evolution, conservation diagnostics, and a
//!   linear-instability rate check.
//! - [`manifold`]: spectral dichotomy projections, eigenvalue-group
//!   bookkeeping, semigroup bound measurement, and the Duhamel fixed-point
//!   construction of infinite-dimensional unstable manifolds for
//!   non-hyperbolic first-order systems, instantiated on the complex
//!   Burgers equation.
//! - [`cli`]: configuration parsing and experiment dispatch for the
//!   `cxeuler` binary.
//!
//! The `book/` directory of the repository walks through each layer with
//! runnable snippets; those snippets are duplicated as doc-tests on the
//! corresponding modules so `cargo test` keeps the guide honest.

pub mod cli;
pub mod euler2d;
pub mod fourier;
pub mod manifold;
pub mod shear;

pub use fourier::{FourierField, NormSpec};
