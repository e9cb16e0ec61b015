//! Per-mode increments of the driving noise or control on the time grid.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::fbm::fgn_increments;
use crate::levy::measure::{sample_jumps, LevyMeasureSpec};
use crate::seed;
use crate::torus::{ModeIndex, ModeSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForcingSource {
    Zero,
    Levy { spec: LevyMeasureSpec, eps: f64 },
    Fbm { hurst: f64 },
    Control,
}

/// `increments[m][i]` is the increment of the process on `modes[m]` over
/// `[i dt, (i + 1) dt)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingPath {
    pub source: ForcingSource,
    pub modes: Vec<ModeIndex>,
    pub dt: f64,
    pub steps: usize,
    pub increments: Vec<Vec<f64>>,
}

impl ForcingPath {
    pub fn zero(k: &ModeSet, steps: usize, dt: f64) -> ForcingPath {
        let modes = k.modes();
        let increments = vec![vec![0.0; steps]; modes.len()];
        ForcingPath { source: ForcingSource::Zero, modes, dt, steps, increments }
    }

    /// Independent compound-Poisson processes on every mode of `K`; jumps
    /// land in the grid cell containing their arrival time.
    pub fn levy(
        k: &ModeSet,
        spec: &LevyMeasureSpec,
        eps: f64,
        steps: usize,
        dt: f64,
        amplitude: f64,
        seed: u64,
    ) -> Result<ForcingPath> {
        spec.validate()?;
        let modes = k.modes();
        let horizon = steps as f64 * dt;
        let mut increments = Vec::with_capacity(modes.len());
        for m in 0..modes.len() {
            let mut rng = seed::rng(seed, &[seed::stream::FORCING, m as u64]);
            let jumps = sample_jumps(spec, eps, horizon, &mut rng)?;
            let mut inc = vec![0.0; steps];
            for (t, y) in jumps.times.iter().zip(&jumps.sizes) {
                let cell = ((t / dt) as usize).min(steps - 1);
                inc[cell] += amplitude * y;
            }
            increments.push(inc);
        }
        Ok(ForcingPath { source: ForcingSource::Levy { spec: *spec, eps }, modes, dt, steps, increments })
    }

    /// Independent fractional Brownian motions on every mode of `K`.
    pub fn fbm(k: &ModeSet, hurst: f64, steps: usize, dt: f64, amplitude: f64, seed: u64) -> Result<ForcingPath> {
        let modes = k.modes();
        let horizon = steps as f64 * dt;
        let mut increments = Vec::with_capacity(modes.len());
        for m in 0..modes.len() {
            let mut rng = seed::rng(seed, &[seed::stream::FORCING, m as u64]);
            let inc = fgn_increments(hurst, steps, horizon, &mut rng)?;
            increments.push(inc.into_iter().map(|x| amplitude * x).collect());
        }
        Ok(ForcingPath { source: ForcingSource::Fbm { hurst }, modes, dt, steps, increments })
    }

    /// Deterministic control `v(t)` on the modes of `K`, as left-point
    /// increments `v_m(i dt) dt`.
    pub fn control(k: &ModeSet, steps: usize, dt: f64, v: impl Fn(ModeIndex, f64) -> f64) -> ForcingPath {
        let modes = k.modes();
        let increments = modes.iter().map(|m| (0..steps).map(|i| v(*m, i as f64 * dt) * dt).collect()).collect();
        ForcingPath { source: ForcingSource::Control, modes, dt, steps, increments }
    }

    /// Steps `start..start + len`.
    pub fn window(&self, start: usize, len: usize) -> Result<ForcingPath> {
        if start + len > self.steps {
            return domain(format!("window {start}+{len} beyond {} steps", self.steps));
        }
        Ok(ForcingPath {
            source: self.source.clone(),
            modes: self.modes.clone(),
            dt: self.dt,
            steps: len,
            increments: self.increments.iter().map(|v| v[start..start + len].to_vec()).collect(),
        })
    }

    /// Sum of two paths on the same modes and grid.
    pub fn plus(&self, other: &ForcingPath) -> Result<ForcingPath> {
        if self.modes != other.modes || self.steps != other.steps || self.dt != other.dt {
            return domain("forcing paths live on different modes or grids");
        }
        let source = if self.source == other.source { self.source.clone() } else { ForcingSource::Control };
        Ok(ForcingPath {
            source,
            modes: self.modes.clone(),
            dt: self.dt,
            steps: self.steps,
            increments: self
                .increments
                .iter()
                .zip(&other.increments)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levy_increments_sum_jumps() {
        let k = ModeSet::standard_generator();
        let spec = LevyMeasureSpec::new(1.5, 1.0, None).unwrap();
        let p = ForcingPath::levy(&k, &spec, 0.1, 100, 0.01, 1.0, 3).unwrap();
        assert_eq!(p.increments.len(), 8);
        for (m, inc) in p.increments.iter().enumerate() {
            let mut rng = seed::rng(3, &[seed::stream::FORCING, m as u64]);
            let jumps = sample_jumps(&spec, 0.1, 1.0, &mut rng).unwrap();
            let total: f64 = inc.iter().sum();
            assert!((total - jumps.sizes.iter().sum::<f64>()).abs() < 1e-9);
        }
        // independent across modes
        assert_ne!(p.increments[0], p.increments[1]);
    }

    #[test]
    fn windows_and_controls() {
        let k = ModeSet::standard_generator();
        let c = ForcingPath::control(&k, 10, 0.1, |m, t| if m.j1 == 1 && m.j2 == 0 { t } else { 0.0 });
        let w = c.window(5, 5).unwrap();
        assert_eq!(w.steps, 5);
        assert!(c.window(6, 5).is_err());
        let s = c.plus(&c).unwrap();
        assert_eq!(s.increments[0][3], 2.0 * c.increments[0][3]);
        assert!(c.plus(&ForcingPath::zero(&k, 9, 0.1)).is_err());
    }

    #[test]
    fn fbm_paths_are_seeded() {
        let k = ModeSet::standard_generator();
        let a = ForcingPath::fbm(&k, 0.75, 64, 1.0 / 64.0, 1.0, 1).unwrap();
        let b = ForcingPath::fbm(&k, 0.75, 64, 1.0 / 64.0, 1.0, 1).unwrap();
        assert_eq!(a, b);
        assert!(ForcingPath::fbm(&k, 1.5, 64, 0.1, 1.0, 1).is_err());
    }
}
