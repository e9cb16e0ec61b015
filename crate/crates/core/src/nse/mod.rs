//! Pseudospectral Galerkin solver for `du + kappa A u dt + B(u, u) dt = dZ`
//! on the torus, with noise or control acting on the modes of a set `K`.

mod forcing;
mod solve;
mod transform;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::torus::SpectralVelocity;

pub use forcing::{ForcingPath, ForcingSource};
pub use solve::{controlled_solve, final_state, solve, Diagnostic, Solver, TrajectoryRecord, BINARY_MAGIC};
pub use transform::{grid_size, smooth_size, Workspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    #[default]
    TwoThirds,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Diffusion by the exact factor `exp(-kappa |j|^2 dt)`.
    #[default]
    IntegratingFactorEuler,
    /// Diffusion implicit: divide by `1 + kappa |j|^2 dt`.
    ImexEuler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub viscosity: f64,
    /// Modes with `|j|_inf <= truncation`.
    pub truncation: u32,
    pub dt: f64,
    pub steps: usize,
    #[serde(default)]
    pub dealias: Dealias,
    #[serde(default)]
    pub scheme: Scheme,
    /// Record a snapshot every this many steps; 0 keeps only the endpoints.
    #[serde(default)]
    pub snapshot_every: usize,
}

impl SolverConfig {
    pub fn new(viscosity: f64, truncation: u32, dt: f64, horizon: f64) -> Result<SolverConfig> {
        let steps = (horizon / dt).round() as usize;
        if !(horizon > 0.0) || ((steps as f64) * dt - horizon).abs() > 1e-9 * horizon {
            return domain(format!("horizon {horizon} is not a whole number of steps of {dt}"));
        }
        let c = SolverConfig {
            viscosity,
            truncation,
            dt,
            steps,
            dealias: Dealias::TwoThirds,
            scheme: Scheme::IntegratingFactorEuler,
            snapshot_every: 0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn horizon(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    /// Heuristic stability bound `0.5 / (kappa N^2)`.
    pub fn max_stable_dt(&self) -> f64 {
        0.5 / (self.viscosity * (self.truncation as f64).powi(2))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.viscosity > 0.0 && self.viscosity.is_finite()) {
            return domain(format!("viscosity {} must be positive", self.viscosity));
        }
        if self.truncation == 0 {
            return domain("truncation must be at least 1");
        }
        if !(self.dt > 0.0) || self.steps == 0 {
            return domain("time step and step count must be positive");
        }
        if self.dt > self.max_stable_dt() {
            return domain(format!("dt = {} exceeds the stability bound {}", self.dt, self.max_stable_dt()));
        }
        Ok(())
    }

    pub(crate) fn check_state(&self, u: &SpectralVelocity) -> Result<()> {
        if u.truncation() != self.truncation {
            return Err(Error::TruncationMismatch { left: u.truncation() as usize, right: self.truncation as usize });
        }
        Ok(())
    }
}

/// `Pi (u . grad v)` with the grid of `dealias`.
pub fn bilinear_term(u: &SpectralVelocity, v: &SpectralVelocity, dealias: Dealias) -> Result<SpectralVelocity> {
    u.check_same(v)?;
    let mut ws = Workspace::new(u.truncation(), dealias);
    let mut out = SpectralVelocity::zeros(u.truncation());
    ws.bilinear(u.coeffs(), v.coeffs(), out.coeffs_mut());
    Ok(out)
}
