//! L1 continuity of the law of `pi_F u(T)` in the initial condition.
//!
//! Seed layout under the base seed `s`:
//! * reference ensemble from `u0`: `derive(s, [1])`;
//! * perturbed ensembles `u0 + delta w`, all deltas: `derive(s, [2])`
//!   (common random numbers, so the distance curve is smooth in delta);
//! * baseline replicates from `u0`: `derive(s, [3, r])`, giving the
//!   same-law noise floor;
//! * the negative control reuses the perturbed stream with a different
//!   forcing law.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ensemble::{run_ensemble, EnsembleSample, ForcingSpec, ProjectionSubspace};
use super::kde::{bandwidths, sample_l1_distance, Bandwidth};
use crate::error::{domain, Result};
use crate::exec::Exec;
use crate::ndjson;
use crate::nse::SolverConfig;
use crate::seed;
use crate::stats;
use crate::torus::SpectralVelocity;

const REFERENCE: u64 = 1;
const PERTURBED: u64 = 2;
const BASELINE: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuityConfig {
    pub solver: SolverConfig,
    pub forcing: ForcingSpec,
    pub u0: SpectralVelocity,
    /// Direction of the perturbation; normalized to unit energy norm.
    pub direction: SpectralVelocity,
    pub deltas: Vec<f64>,
    pub subspace: ProjectionSubspace,
    pub members: usize,
    pub baseline_replicates: usize,
    /// Forcing of the negative control; `None` skips it.
    pub control_forcing: Option<ForcingSpec>,
    pub bandwidth: Bandwidth,
    /// Slack of the monotonicity check in units of the floor's sd.
    #[serde(default = "default_slack")]
    pub slack: f64,
}

fn default_slack() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityPoint {
    pub delta: f64,
    pub distance: f64,
    pub control_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub config_hash: String,
    pub base_seed: u64,
    pub bandwidth: Vec<f64>,
    pub points: Vec<ContinuityPoint>,
    pub baseline: Vec<f64>,
    pub floor_mean: f64,
    pub floor_sd: f64,
    /// Kendall-type trend: concordant minus discordant (delta, distance) pairs over all pairs.
    pub trend: f64,
    /// Distances nonincreasing as delta decreases, within `slack * floor_sd`.
    pub nonincreasing: bool,
    /// Distance at the smallest delta within three floor sds of the floor mean.
    pub reaches_floor: bool,
    /// Negative control at the smallest delta still three floor sds above the
    /// floor mean. Intermediate deltas may dip: a shifted law and a shifted
    /// initial condition can partly cancel.
    pub control_persists: Option<bool>,
    pub excluded: usize,
}

impl ContinuityReport {
    pub fn passed(&self) -> bool {
        self.nonincreasing && self.reaches_floor && self.control_persists.unwrap_or(true)
    }

    pub fn write_ndjson<W: Write>(&self, mut w: W) -> Result<()> {
        ndjson::write_line(&mut w, self)
    }
}

fn trend(points: &[ContinuityPoint]) -> f64 {
    let mut score = 0.0;
    let mut pairs = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let s = (a.delta - b.delta).signum() * (a.distance - b.distance).signum();
            score += s;
            pairs += 1.0;
        }
    }
    if pairs > 0.0 { score / pairs } else { 0.0 }
}

pub fn continuity_in_initial_condition(config: &ContinuityConfig, base_seed: u64, exec: Exec) -> Result<ContinuityReport> {
    let c = config;
    if c.deltas.is_empty() || c.deltas.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return domain("deltas must be finite and nonnegative");
    }
    if c.deltas.windows(2).any(|w| w[1] >= w[0]) {
        return domain("deltas must be strictly decreasing");
    }
    if c.baseline_replicates < 2 {
        return domain("need at least two baseline replicates for a noise floor");
    }
    let norm = c.direction.energy().sqrt();
    if norm == 0.0 {
        return domain("perturbation direction is zero");
    }
    let w = c.direction.scaled(1.0 / norm);
    let ensemble = |u0: &SpectralVelocity, forcing: &ForcingSpec, seed: u64| -> Result<EnsembleSample> {
        run_ensemble(&c.solver, forcing, u0, &c.subspace, c.members, seed, exec)
    };
    let perturbed = |delta: f64| -> Result<SpectralVelocity> {
        let mut u = c.u0.clone();
        u.axpy(delta, &w)?;
        Ok(u)
    };

    let reference = ensemble(&c.u0, &c.forcing, seed::derive(base_seed, &[REFERENCE]))?;
    let h = bandwidths(&reference.rows, &c.bandwidth)?;
    let mut excluded = reference.excluded;

    let mut baseline = Vec::with_capacity(c.baseline_replicates);
    for r in 0..c.baseline_replicates {
        let s = ensemble(&c.u0, &c.forcing, seed::derive(base_seed, &[BASELINE, r as u64]))?;
        excluded += s.excluded;
        baseline.push(sample_l1_distance(&reference.rows, &s.rows, &h)?);
    }
    let floor_mean = stats::mean(&baseline);
    let floor_sd = stats::variance(&baseline).sqrt();

    let stream = seed::derive(base_seed, &[PERTURBED]);
    let mut points = Vec::with_capacity(c.deltas.len());
    for &delta in &c.deltas {
        let u = perturbed(delta)?;
        let s = ensemble(&u, &c.forcing, stream)?;
        excluded += s.excluded;
        let distance = sample_l1_distance(&reference.rows, &s.rows, &h)?;
        let control_distance = match &c.control_forcing {
            Some(f) => {
                let s = ensemble(&u, f, stream)?;
                excluded += s.excluded;
                Some(sample_l1_distance(&reference.rows, &s.rows, &h)?)
            }
            None => None,
        };
        points.push(ContinuityPoint { delta, distance, control_distance });
    }

    let tol = c.slack * floor_sd;
    let nonincreasing = points.windows(2).all(|p| p[1].distance <= p[0].distance + tol);
    let last = points.last().expect("non-empty deltas");
    let reaches_floor = last.distance <= floor_mean + 3.0 * floor_sd;
    let control_persists =
        c.control_forcing.as_ref().map(|_| last.control_distance.is_some_and(|d| d > floor_mean + 3.0 * floor_sd));
    Ok(ContinuityReport {
        config_hash: reference.provenance.config_hash.clone(),
        base_seed,
        bandwidth: h,
        trend: trend(&points),
        points,
        baseline,
        floor_mean,
        floor_sd,
        nonincreasing,
        reaches_floor,
        control_persists,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_of_monotone_sequence() {
        let pts: Vec<ContinuityPoint> = [(0.5, 0.9), (0.25, 0.5), (0.125, 0.3), (0.0, 0.1)]
            .iter()
            .map(|(d, x)| ContinuityPoint { delta: *d, distance: *x, control_distance: None })
            .collect();
        assert_eq!(trend(&pts), 1.0);
        let rev: Vec<ContinuityPoint> =
            pts.iter().map(|p| ContinuityPoint { distance: 1.0 - p.distance, ..p.clone() }).collect();
        assert_eq!(trend(&rev), -1.0);
    }
}
