//! Fixed-strike Asian option pricing under finite-state continuous-time
//! Markov chain (CTMC) approximations of one-dimensional price processes.
//!
//! For a chain with states `x`, generator `G` and `D = diag(x)`, the Laplace
//! transform in the strike of the undiscounted payoff `E[(avg − k)⁺]` has an
//! explicit single-transform form:
//!
//! ```text
//! g_d(n, θ) = θ⁻² (e^{-θD} P(Δ))ⁿ e^{-θD} 1 − θ⁻² 1 + x θ⁻¹ (1 − e^{(n+1)rΔ}) / (1 − e^{rΔ})
//! g_c(t, θ) = θ⁻² e^{(G − θD)t} 1 − θ⁻² 1 + x (rθ)⁻¹ (e^{rt} − 1)
//! ```
//!
//! Prices follow by numerically inverting these in the strike variable
//! (Euler algorithm) and rescaling. The crate is organized as
//!
//! - [`linalg`]: dense complex kernels (products, inverse, `expm`, `expm` action);
//! - [`chain`]: state grid, generator, cached transition matrices;
//! - [`models`]: CTMC generators for CIR, CEV, Kou (DEJD), Merton (MJD), CGMY;
//! - [`transforms`]: the discrete and continuous strike transforms;
//! - [`inversion`]: Euler-algorithm Laplace inversion;
//! - [`oracles`]: double transforms, path enumeration and exact Monte Carlo;
//! - [`pricing`]: end-to-end prices, tables, timing and convergence sweeps;
//! - [`benchmarks`]: published reference prices and their parameter sets;
//! - [`config`]: TOML requests with `key=value` overrides;
//! - [`validate`]: the seeded property suite run by `asian-ctmc validate`.

pub mod benchmarks;
pub mod chain;
pub mod config;
pub mod error;
pub mod inversion;
pub mod linalg;
pub mod models;
pub mod oracles;
pub mod pricing;
pub mod quadrature;
pub mod transforms;
pub mod validate;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
