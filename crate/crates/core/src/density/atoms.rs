//! Atom detection for samples in `R^d`.
//!
//! Two statistics. Exact duplicates, of whole rows and within each
//! coordinate (a law with a density has marginals with densities): under
//! such a law repeats only arise from floating-point collisions. For values of unit
//! scale the chance of any collision among `M` draws is about
//! `M^2 2^-53`, below `1e-5` for `M <= 1e5`, so any repeat counts as an
//! atom. Near-duplicates: the count of points whose
//! nearest-neighbour gap (after a random 1-d projection when `d > 1`)
//! falls below a small fraction of the median gap, compared with a
//! smoothed-bootstrap null drawn from a Gaussian KDE of the same sample.

use std::collections::HashMap;

use rand::seq::IndexedRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, stream};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtomTestConfig {
    /// Significance level of the nearest-neighbour test.
    pub level: f64,
    pub bootstrap: usize,
    /// Gaps below `relative_gap * median gap` count as near-duplicates.
    pub relative_gap: f64,
    pub min_samples: usize,
    pub seed: u64,
}

impl Default for AtomTestConfig {
    fn default() -> Self {
        AtomTestConfig { level: 0.01, bootstrap: 199, relative_gap: 1e-3, min_samples: 500, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomVerdict {
    NoAtoms,
    AtomDetected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomReport {
    pub samples: usize,
    /// Largest multiplicity of an exactly repeated row.
    pub max_multiplicity: usize,
    pub max_duplicate_mass: f64,
    /// Largest multiplicity of a repeated value within one coordinate.
    pub max_marginal_multiplicity: usize,
    /// Number of near-duplicate points.
    pub nn_statistic: usize,
    /// `1 - level` quantile of the statistic under the bootstrap null.
    pub null_quantile: f64,
    /// Bootstrap p-value `(1 + #{T* >= T}) / (B + 1)`.
    pub p_value: f64,
    pub verdict: AtomVerdict,
}

impl AtomReport {
    pub fn atom_detected(&self) -> bool {
        self.verdict == AtomVerdict::AtomDetected
    }
}

// +0.0 and -0.0 are the same point
fn key(x: f64) -> u64 {
    if x == 0.0 { 0 } else { x.to_bits() }
}

fn max_multiplicity(rows: &[Vec<f64>]) -> usize {
    let mut counts: HashMap<Vec<u64>, usize> = HashMap::with_capacity(rows.len());
    for r in rows {
        *counts.entry(r.iter().map(|x| key(*x)).collect()).or_default() += 1;
    }
    counts.into_values().max().unwrap_or(0)
}

fn max_marginal_multiplicity(rows: &[Vec<f64>]) -> usize {
    (0..rows[0].len())
        .map(|c| {
            let mut counts: HashMap<u64, usize> = HashMap::with_capacity(rows.len());
            for r in rows {
                *counts.entry(key(r[c])).or_default() += 1;
            }
            counts.into_values().max().unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
}

/// Nearest-neighbour gaps of a 1-d sample.
fn nn_gaps(xs: &[f64]) -> Vec<f64> {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { s[i] - s[i - 1] } else { f64::INFINITY };
            let right = if i + 1 < n { s[i + 1] - s[i] } else { f64::INFINITY };
            left.min(right)
        })
        .collect()
}

fn near_duplicates(xs: &[f64], relative_gap: f64) -> usize {
    let gaps = nn_gaps(xs);
    let median = stats::quantile(&gaps, 0.5);
    let r = relative_gap * median;
    gaps.iter().filter(|g| **g < r || **g == 0.0).count()
}

/// Robust scale `min(sd, IQR / 1.349)`, falling back to whichever is positive.
pub(crate) fn robust_scale(xs: &[f64]) -> f64 {
    if xs.iter().all(|x| *x == xs[0]) {
        return 0.0;
    }
    let sd = stats::variance(xs).sqrt();
    let iqr = (stats::quantile(xs, 0.75) - stats::quantile(xs, 0.25)) / 1.349;
    match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr),
        (true, false) => sd,
        _ => iqr.max(0.0),
    }
}

fn project(rows: &[Vec<f64>], seed: u64) -> Vec<f64> {
    let d = rows[0].len();
    if d == 1 {
        return rows.iter().map(|r| r[0]).collect();
    }
    // standardize coordinates so one wide coordinate cannot mask the others
    let scales: Vec<f64> = (0..d)
        .map(|c| {
            let col: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            let s = robust_scale(&col);
            if s > 0.0 { s } else { 1.0 }
        })
        .collect();
    let mut rng = seed::rng(seed, &[stream::PROJECTION]);
    let mut dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    dir.iter_mut().for_each(|x| *x /= norm);
    rows.iter().map(|r| r.iter().zip(&dir).zip(&scales).map(|((x, u), s)| x * u / s).sum()).collect()
}

pub fn atom_test(rows: &[Vec<f64>], config: &AtomTestConfig) -> Result<AtomReport> {
    let m = rows.len();
    if m < config.min_samples.max(2) {
        return Err(Error::InsufficientSamples { needed: config.min_samples.max(2), got: m });
    }
    let d = rows[0].len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Domain("rows must share a positive dimension".into()));
    }
    if !(0.0 < config.level && config.level < 1.0) || config.bootstrap < 19 || config.relative_gap <= 0.0 {
        return Err(Error::Domain("atom test needs level in (0,1), >= 19 bootstrap draws, positive gap".into()));
    }
    let max_multiplicity = max_multiplicity(rows);
    let max_marginal_multiplicity = max_marginal_multiplicity(rows);
    let xs = project(rows, config.seed);
    let t = near_duplicates(&xs, config.relative_gap);

    // smoothed bootstrap from a Gaussian KDE with Silverman's bandwidth
    let scale = robust_scale(&xs);
    let h = 0.9 * scale * (m as f64).powf(-0.2);
    let mut rng = seed::rng(config.seed, &[stream::BOOTSTRAP]);
    let mut null = Vec::with_capacity(config.bootstrap);
    let mut buf = vec![0.0; m];
    for _ in 0..config.bootstrap {
        for b in buf.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *b = *xs.choose(&mut rng).expect("non-empty") + h * z;
        }
        null.push(near_duplicates(&buf, config.relative_gap) as f64);
    }
    let exceed = null.iter().filter(|x| **x >= t as f64).count();
    let p_value = (1 + exceed) as f64 / (config.bootstrap + 1) as f64;
    let null_quantile = stats::quantile(&null, 1.0 - config.level);
    let atom = max_marginal_multiplicity > 1 || h == 0.0 || p_value <= config.level;
    Ok(AtomReport {
        samples: m,
        max_multiplicity,
        max_duplicate_mass: max_multiplicity as f64 / m as f64,
        max_marginal_multiplicity,
        nn_statistic: t,
        null_quantile,
        p_value,
        verdict: if atom { AtomVerdict::AtomDetected } else { AtomVerdict::NoAtoms },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::Uniform;

    fn uniform_rows(m: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = seed::rng(seed, &[99]);
        let u = Uniform::new(0.0, 1.0).unwrap();
        (0..m).map(|_| (0..d).map(|_| u.sample(&mut rng)).collect()).collect()
    }

    #[test]
    fn continuous_uniform_has_no_atoms() {
        let rows = uniform_rows(2000, 1, 1);
        let r = atom_test(&rows, &AtomTestConfig::default()).unwrap();
        assert_eq!(r.max_multiplicity, 1);
        assert_eq!(r.verdict, AtomVerdict::NoAtoms, "{r:?}");
    }

    #[test]
    fn planted_atom_is_detected() {
        let mut rows = uniform_rows(2000, 2, 2);
        for r in rows.iter_mut().step_by(10) {
            *r = vec![0.3, 0.7];
        }
        let r = atom_test(&rows, &AtomTestConfig::default()).unwrap();
        assert_eq!(r.max_multiplicity, 200);
        assert!((r.max_duplicate_mass - 0.1).abs() < 1e-12);
        assert!(r.atom_detected());
    }

    #[test]
    fn atom_in_one_marginal_is_detected() {
        // rows are distinct, but the first coordinate takes only a few values
        let mut rows = uniform_rows(1000, 8, 6);
        rows.iter_mut().enumerate().for_each(|(i, r)| r[0] = (i % 7) as f64);
        let r = atom_test(&rows, &AtomTestConfig::default()).unwrap();
        assert_eq!(r.max_multiplicity, 1);
        assert!(r.max_marginal_multiplicity >= 142);
        assert!(r.atom_detected());
    }

    #[test]
    fn near_atom_without_exact_repeats_is_detected() {
        let mut rows = uniform_rows(2000, 1, 3);
        for (i, r) in rows.iter_mut().enumerate().step_by(10) {
            r[0] = 0.5 + i as f64 * 1e-12;
        }
        let r = atom_test(&rows, &AtomTestConfig::default()).unwrap();
        assert_eq!(r.max_multiplicity, 1);
        assert!(r.nn_statistic >= 200);
        assert!(r.atom_detected());
    }

    #[test]
    fn rejects_small_samples() {
        let rows = uniform_rows(100, 1, 4);
        assert!(matches!(
            atom_test(&rows, &AtomTestConfig::default()),
            Err(Error::InsufficientSamples { needed: 500, got: 100 })
        ));
    }

    #[test]
    fn deterministic_in_seed() {
        let rows = uniform_rows(600, 3, 5);
        let c = AtomTestConfig::default();
        assert_eq!(atom_test(&rows, &c).unwrap(), atom_test(&rows, &c).unwrap());
    }

    #[test]
    fn type_one_error_is_calibrated() {
        // 100 continuous samples from three shapes; false alarms at level 0.01
        // must stay at or below 5%.
        let mut false_alarms = 0;
        for s in 0..100u64 {
            let mut rows = uniform_rows(500, 1, 1000 + s);
            match s % 3 {
                0 => {}
                1 => rows.iter_mut().for_each(|r| r[0] = -r[0].ln()),
                _ => rows.iter_mut().for_each(|r| r[0] = (std::f64::consts::PI * (r[0] - 0.5)).tan()),
            }
            let c = AtomTestConfig { seed: s, ..AtomTestConfig::default() };
            if atom_test(&rows, &c).unwrap().atom_detected() {
                false_alarms += 1;
            }
        }
        assert!(false_alarms <= 5, "{false_alarms} false alarms");
    }
}
