//! Time stepping, trajectories and the control-to-state map `R_T`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::forcing::{ForcingPath, ForcingSource};
use super::transform::Workspace;
use super::{Scheme, SolverConfig};
use crate::error::{domain, Error, Result};
use crate::ndjson;
use crate::torus::{ModeIndex, SpectralVelocity};

/// One solver per trajectory: owns the transform workspace and the
/// per-mode diffusion factors.
pub struct Solver {
    config: SolverConfig,
    ws: Workspace,
    factor: Vec<f64>,
    nonlinear: Vec<f64>,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Solver> {
        config.validate()?;
        let template = SpectralVelocity::zeros(config.truncation);
        let factor = (0..template.len())
            .map(|i| {
                let lam = template.mode_at(i).norm_sq() as f64 * config.viscosity * config.dt;
                match config.scheme {
                    Scheme::IntegratingFactorEuler => (-lam).exp(),
                    Scheme::ImexEuler => 1.0 / (1.0 + lam),
                }
            })
            .collect();
        Ok(Solver {
            config,
            ws: Workspace::new(config.truncation, config.dealias),
            factor,
            nonlinear: vec![0.0; template.len()],
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Positions of the forced modes in the state vector.
    pub fn forced_indices(&self, forcing: &ForcingPath) -> Result<Vec<usize>> {
        if forcing.dt != self.config.dt {
            return domain(format!("forcing dt {} differs from solver dt {}", forcing.dt, self.config.dt));
        }
        let template = SpectralVelocity::zeros(self.config.truncation);
        forcing
            .modes
            .iter()
            .map(|m| {
                template
                    .index_of(*m)
                    .ok_or_else(|| Error::Domain(format!("forced mode {m:?} outside truncation")))
            })
            .collect()
    }

    /// `u <- F (u - dt B(u, u)) + dZ`, where `F` is the diffusion factor and
    /// `dZ` is given as `(index, increment)` pairs.
    pub fn step(&mut self, u: &mut SpectralVelocity, noise: impl Iterator<Item = (usize, f64)>, step_index: usize) -> Result<()> {
        self.config.check_state(u)?;
        self.ws.self_advection(u.coeffs(), &mut self.nonlinear);
        let dt = self.config.dt;
        let c = u.coeffs_mut();
        for ((x, b), f) in c.iter_mut().zip(&self.nonlinear).zip(&self.factor) {
            *x = f * (*x - dt * b);
        }
        for (i, dz) in noise {
            c[i] += dz;
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence { step: step_index });
        }
        Ok(())
    }

    /// Advances `u` over all steps of `forcing`, calling `observe(step, u)`
    /// after each step.
    pub fn run(
        &mut self,
        u: &mut SpectralVelocity,
        forcing: &ForcingPath,
        mut observe: impl FnMut(usize, &SpectralVelocity),
    ) -> Result<()> {
        let idx = self.forced_indices(forcing)?;
        for i in 0..forcing.steps {
            let noise = idx.iter().zip(&forcing.increments).map(|(&k, inc)| (k, inc[i]));
            self.step(u, noise, i)?;
            observe(i + 1, u);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub t: f64,
    pub energy: f64,
    pub enstrophy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub snapshots: Vec<SpectralVelocity>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Serialize)]
struct SnapshotEntry {
    t: f64,
    mode: ModeIndex,
    value: f64,
}

/// Magic bytes opening the binary trajectory layout.
pub const BINARY_MAGIC: &[u8; 8] = b"DLTRAJ01";

impl TrajectoryRecord {
    pub fn final_state(&self) -> &SpectralVelocity {
        self.snapshots.last().expect("trajectory has snapshots")
    }

    /// One `{t, mode, value}` line per coefficient and snapshot.
    pub fn write_ndjson<W: Write>(&self, mut w: W) -> Result<()> {
        for (t, u) in self.times.iter().zip(&self.snapshots) {
            for (mode, value) in u.modes() {
                ndjson::write_line(&mut w, &SnapshotEntry { t: *t, mode, value })?;
            }
        }
        Ok(())
    }

    /// Little endian: magic, `truncation: u32`, `coefficients: u32`,
    /// `snapshots: u64`, then per snapshot `t: f64` and the coefficients as
    /// `f64` in state order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let truncation = self.snapshots.first().map_or(0, |u| u.truncation());
        let len = self.snapshots.first().map_or(0, |u| u.len());
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&truncation.to_le_bytes())?;
        w.write_all(&(len as u32).to_le_bytes())?;
        w.write_all(&(self.snapshots.len() as u64).to_le_bytes())?;
        for (t, u) in self.times.iter().zip(&self.snapshots) {
            w.write_all(&t.to_le_bytes())?;
            for c in u.coeffs() {
                w.write_all(&c.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Snapshots from [`Self::write_binary`] output (diagnostics are not stored).
    pub fn read_binary<R: Read>(mut r: R) -> Result<(Vec<f64>, Vec<SpectralVelocity>)> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return domain("not a trajectory file");
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let truncation = u32::from_le_bytes(b4);
        r.read_exact(&mut b4)?;
        let len = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let count = u64::from_le_bytes(b8) as usize;
        let mut times = Vec::with_capacity(count);
        let mut snaps = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut b8)?;
            times.push(f64::from_le_bytes(b8));
            let mut c = Vec::with_capacity(len);
            for _ in 0..len {
                r.read_exact(&mut b8)?;
                c.push(f64::from_le_bytes(b8));
            }
            snaps.push(SpectralVelocity::from_coeffs(truncation, c)?);
        }
        Ok((times, snaps))
    }

    pub fn write_diagnostics_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,energy,enstrophy")?;
        for d in &self.diagnostics {
            writeln!(w, "{},{},{}", d.t, d.energy, d.enstrophy)?;
        }
        Ok(())
    }
}

fn check_grid(forcing: &ForcingPath, config: &SolverConfig) -> Result<()> {
    if forcing.steps != config.steps || forcing.dt != config.dt {
        return domain(format!(
            "forcing grid ({} steps of {}) does not match the solver ({} of {})",
            forcing.steps, forcing.dt, config.steps, config.dt
        ));
    }
    Ok(())
}

/// Full trajectory from `u0` under `forcing`.
pub fn solve(u0: &SpectralVelocity, forcing: &ForcingPath, config: &SolverConfig) -> Result<TrajectoryRecord> {
    check_grid(forcing, config)?;
    config.check_state(u0)?;
    let mut solver = Solver::new(*config)?;
    let mut u = u0.clone();
    let diag = |t: f64, u: &SpectralVelocity| Diagnostic { t, energy: u.energy(), enstrophy: u.enstrophy() };
    let mut rec = TrajectoryRecord { times: vec![0.0], snapshots: vec![u0.clone()], diagnostics: vec![diag(0.0, u0)] };
    let every = config.snapshot_every;
    solver.run(&mut u, forcing, |i, u| {
        let t = i as f64 * config.dt;
        rec.diagnostics.push(diag(t, u));
        if (every > 0 && i % every == 0) || i == config.steps {
            rec.times.push(t);
            rec.snapshots.push(u.clone());
        }
    })?;
    Ok(rec)
}

/// `u(T)` only.
pub fn final_state(u0: &SpectralVelocity, forcing: &ForcingPath, config: &SolverConfig) -> Result<SpectralVelocity> {
    check_grid(forcing, config)?;
    config.check_state(u0)?;
    let mut solver = Solver::new(*config)?;
    let mut u = u0.clone();
    solver.run(&mut u, forcing, |_, _| {})?;
    Ok(u)
}

/// The solution operator `R_T(u0, v)` for a deterministic control `v`.
pub fn controlled_solve(u0: &SpectralVelocity, control: &ForcingPath, config: &SolverConfig) -> Result<SpectralVelocity> {
    if !matches!(control.source, ForcingSource::Control | ForcingSource::Zero) {
        return domain("controlled_solve needs a deterministic control path");
    }
    final_state(u0, control, config)
}
