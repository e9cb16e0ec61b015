//! Simulation laboratory for stochastic 2D Navier-Stokes flows driven by
//! Lévy or fractional Brownian noise.
//!
//! * [`wavelet`]: Haar / Daubechies multiresolution analysis on `[0, 1]`,
//!   coefficient fields and Besov sequence norms.
//! * [`levy`]: compound-Poisson synthesis of truncated symmetric power-law
//!   Lévy noise and its wavelet coefficients, with moment, truncation and
//!   small-ball diagnostics.
//! * [`fbm`]: exact Gaussian wavelet coefficients of fractional noise and
//!   fractional Gaussian increments on a grid.
//! * [`torus`]: the Stokes eigenbasis on the 2π-periodic torus and
//!   saturating mode sets on `Z^2`.
//! * [`nse`]: pseudospectral Galerkin solver with additive noise or a
//!   deterministic control.
//! * [`density`]: Monte Carlo ensembles, atom tests, kernel density
//!   estimates and the continuity / conditional-kernel probes.

pub mod density;
pub mod error;
pub mod exec;
pub mod fbm;
pub mod levy;
pub mod ndjson;
pub mod nse;
pub mod quad;
pub mod seed;
pub mod stats;
pub mod torus;
pub mod wavelet;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use exec::Exec;
