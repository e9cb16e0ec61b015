//! Conditional law of the level-`n` detail coefficients of a noise field
//! given a coarse coefficient.
//!
//! Each draw is a Haar coefficient field up to level `n`. The coarse value
//! `gamma` is the scaling coefficient `a_{n,0}`, rebuilt from the pyramid;
//! it depends on the coarser details only, never on level `n`. Draws are
//! grouped into equal-count quantile cells of `gamma`, and inside every
//! cell with enough members the atom test runs on the vectors
//! `(zeta_{n,k})_k`.

use std::io::Write;

use rand::Rng as _;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::atoms::{atom_test, AtomReport, AtomTestConfig};
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::fbm::{FbmSampler, FbmSpec};
use crate::levy::coeffs::field_from_jumps;
use crate::levy::measure::{sample_large_jumps, JumpSample, LevyMeasureSpec};
use crate::ndjson;
use crate::seed::{self, stream};
use crate::wavelet::{CoefficientField, WaveletFamily};

pub const MAX_PROBE_LEVEL: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSource {
    Fbm { hurst: f64 },
    Levy { spec: LevyMeasureSpec, eps: f64 },
    /// Compound Poisson with jump sizes `+-size` only: a law with atoms.
    TwoPoint { rate: f64, size: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub level: u32,
    pub samples: usize,
    pub cells: usize,
    pub min_occupancy: usize,
    pub atom: AtomTestConfig,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            level: 2,
            samples: 5000,
            cells: 5,
            min_occupancy: 200,
            atom: AtomTestConfig { min_samples: 200, ..AtomTestConfig::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeCell {
    pub cell: usize,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub members: usize,
    /// `None` when the cell is below the occupancy threshold.
    pub report: Option<AtomReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub source: NoiseSource,
    pub level: u32,
    pub base_seed: u64,
    pub samples: usize,
    pub cells: Vec<ProbeCell>,
    pub skipped: usize,
    pub atoms_detected: usize,
}

impl ProbeReport {
    pub fn tested(&self) -> usize {
        self.cells.len() - self.skipped
    }

    pub fn any_atoms(&self) -> bool {
        self.atoms_detected > 0
    }

    pub fn write_ndjson<W: Write>(&self, mut w: W) -> Result<()> {
        ndjson::write_all(&mut w, &self.cells)?;
        ndjson::write_line(&mut w, self)
    }
}

/// Scaling coefficient `a_{n,0}` from the Haar pyramid of `field`.
pub fn haar_coarse(field: &CoefficientField, n: u32) -> f64 {
    let mut a = field.coarse();
    for j in 0..n {
        a = (a + field.get(j, 0)) * std::f64::consts::FRAC_1_SQRT_2;
    }
    a
}

fn two_point_jumps(rate: f64, size: f64, seed: u64) -> Result<JumpSample> {
    let mut rng = seed::rng(seed, &[stream::JUMPS]);
    let count = Poisson::new(rate).map_err(|e| Error::Domain(format!("Poisson rate: {e}")))?.sample(&mut rng) as usize;
    let mut j = JumpSample::empty(size, 1.0);
    for _ in 0..count {
        j.times.push(rng.random::<f64>());
        j.sizes.push(if rng.random::<bool>() { size } else { -size });
    }
    Ok(j)
}

fn draw(source: &NoiseSource, n: u32, seed: u64, fbm: Option<&FbmSampler>) -> Result<CoefficientField> {
    let haar = WaveletFamily::haar();
    match *source {
        NoiseSource::Fbm { .. } => Ok(fbm.expect("sampler built for fbm").sample(seed)),
        NoiseSource::Levy { spec, eps } => Ok(field_from_jumps(&sample_large_jumps(&spec, eps, seed)?, &haar, n)),
        NoiseSource::TwoPoint { rate, size } => Ok(field_from_jumps(&two_point_jumps(rate, size, seed)?, &haar, n)),
    }
}

pub fn conditional_kernel_probe(source: &NoiseSource, config: &ProbeConfig, base_seed: u64, exec: Exec) -> Result<ProbeReport> {
    let n = config.level;
    if n > MAX_PROBE_LEVEL {
        return domain(format!("probe level {n} above {MAX_PROBE_LEVEL}"));
    }
    if config.cells == 0 || config.samples < config.cells {
        return domain("need at least one cell and one sample per cell");
    }
    match source {
        NoiseSource::Fbm { .. } | NoiseSource::Levy { .. } => {}
        NoiseSource::TwoPoint { rate, size } => {
            if !(rate.is_finite() && *rate > 0.0 && size.is_finite() && *size > 0.0) {
                return domain("two-point source needs positive rate and size");
            }
        }
    }
    let fbm = match source {
        NoiseSource::Fbm { hurst } => Some(FbmSampler::cached(&FbmSpec::new(*hurst, n)?)?),
        _ => None,
    };
    let draws: Vec<Result<(f64, Vec<f64>)>> = exec.map(config.samples, |m| {
        let field = draw(source, n, seed::derive(base_seed, &[stream::PROBE, m as u64]), fbm.as_deref())?;
        Ok((haar_coarse(&field, n), field.level(n).to_vec()))
    });
    let mut draws: Vec<(f64, Vec<f64>)> = draws.into_iter().collect::<Result<_>>()?;
    // ties keep draw order, so cells are reproducible
    draws.sort_by(|a, b| a.0.total_cmp(&b.0));
    let gammas: Vec<f64> = draws.iter().map(|d| d.0).collect();

    let mut cells = Vec::with_capacity(config.cells);
    let mut skipped = 0;
    let mut atoms = 0;
    for c in 0..config.cells {
        let lo = c * draws.len() / config.cells;
        let hi = (c + 1) * draws.len() / config.cells;
        let members = hi - lo;
        let rows: Vec<Vec<f64>> = draws[lo..hi].iter().map(|d| d.1.clone()).collect();
        let report = if members >= config.min_occupancy {
            let atom = AtomTestConfig { seed: seed::derive(base_seed, &[stream::PROBE, u64::MAX, c as u64]), ..config.atom };
            Some(atom_test(&rows, &atom)?)
        } else {
            skipped += 1;
            None
        };
        if report.as_ref().is_some_and(|r| r.atom_detected()) {
            atoms += 1;
        }
        cells.push(ProbeCell {
            cell: c,
            gamma_lo: gammas[lo],
            gamma_hi: gammas[hi - 1],
            members,
            report,
        });
    }
    Ok(ProbeReport { source: *source, level: n, base_seed, samples: config.samples, cells, skipped, atoms_detected: atoms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_coefficient_matches_box_integral() {
        // a_{n,0} of a jump path is 2^{n/2} times the sum of jumps in [0, 2^-n)
        let j = JumpSample { eps: 0.1, horizon: 1.0, times: vec![0.05, 0.2, 0.6, 0.01], sizes: vec![1.0, -2.0, 3.0, 0.5] };
        let f = field_from_jumps(&j, &WaveletFamily::haar(), 3);
        assert!((haar_coarse(&f, 0) - 2.5).abs() < 1e-14);
        assert!((haar_coarse(&f, 2) - 2.0 * (1.0 - 2.0 + 0.5)).abs() < 1e-14);
        assert!((haar_coarse(&f, 3) - 8f64.sqrt() * 1.5).abs() < 1e-14);
    }

    #[test]
    fn small_probe_behaves() {
        let cfg = ProbeConfig { level: 1, samples: 1000, cells: 4, ..ProbeConfig::default() };
        let g = conditional_kernel_probe(&NoiseSource::Fbm { hurst: 0.75 }, &cfg, 1, Exec::Sequential).unwrap();
        assert_eq!(g.tested(), 4);
        assert!(!g.any_atoms(), "{g:?}");
        let planted = NoiseSource::TwoPoint { rate: 5.0, size: 1.0 };
        let p = conditional_kernel_probe(&planted, &cfg, 1, Exec::Sequential).unwrap();
        assert!(p.any_atoms());
        let sparse = ProbeConfig { cells: 8, ..cfg };
        let s = conditional_kernel_probe(&NoiseSource::Fbm { hurst: 0.75 }, &sparse, 1, Exec::Sequential).unwrap();
        assert_eq!(s.skipped, 8);
        assert!(conditional_kernel_probe(&planted, &ProbeConfig { level: 5, ..cfg }, 1, Exec::Sequential).is_err());
    }
}
