//! Joint Gaussian draws of the Haar coefficient field.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::covariance::{joint_covariance, psd_factor};
use super::FbmSpec;
use crate::error::{domain, Result};
use crate::exec::Exec;
use crate::seed;
use crate::stats::{self, LinearFit};
use crate::wavelet::{BesovParams, CoefficientField};

/// Lower Cholesky factor of the joint coefficient covariance up to `max_level`.
#[derive(Debug)]
pub struct FbmSampler {
    spec: FbmSpec,
    factor: DMatrix<f64>,
}

impl FbmSampler {
    pub fn new(spec: &FbmSpec) -> Result<FbmSampler> {
        spec.validate()?;
        let cov = joint_covariance(spec);
        let factor = psd_factor(&cov, "joint fBm covariance")?.unpack();
        Ok(FbmSampler { spec: *spec, factor })
    }

    /// Shared sampler for `spec`; the factorization is built once per process.
    pub fn cached(spec: &FbmSpec) -> Result<Arc<FbmSampler>> {
        type Cache = Mutex<HashMap<(u64, u32), Arc<FbmSampler>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let key = (spec.hurst.to_bits(), spec.max_level);
        let cache = CACHE.get_or_init(Default::default);
        if let Some(s) = cache.lock().unwrap().get(&key) {
            return Ok(s.clone());
        }
        let s = Arc::new(FbmSampler::new(spec)?);
        cache.lock().unwrap().insert(key, s.clone());
        Ok(s)
    }

    pub fn spec(&self) -> &FbmSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        self.factor.nrows()
    }

    /// Coefficients `L z` for the given standard normals.
    pub fn transform(&self, z: &[f64]) -> Result<CoefficientField> {
        if z.len() != self.dimension() {
            return domain(format!("expected {} normals, got {}", self.dimension(), z.len()));
        }
        let x = &self.factor * DVector::from_column_slice(z);
        CoefficientField::from_vec(self.spec.max_level, x.as_slice())
    }

    pub fn sample(&self, seed: u64) -> CoefficientField {
        let mut rng = seed::rng(seed, &[seed::stream::FBM, 1]);
        let z: Vec<f64> = (0..self.dimension()).map(|_| StandardNormal.sample(&mut rng)).collect();
        self.transform(&z).expect("dimension matches")
    }
}

/// One draw of the fBm coefficient field up to `spec.max_level`.
pub fn sample_coefficients(spec: &FbmSpec, seed: u64) -> Result<CoefficientField> {
    Ok(FbmSampler::cached(spec)?.sample(seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyLevel {
    pub j: u32,
    /// `E 2^{2js} sum_k zeta_{j,k}^2` at each smoothness.
    pub below: f64,
    pub above: f64,
    /// `E ||xi||^2_{B^s_{2,2}}` truncated at level `j`.
    pub cumulative_below: f64,
    pub cumulative_above: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BesovDichotomyReport {
    pub hurst: f64,
    pub max_level: u32,
    pub samples: usize,
    pub s_below: f64,
    pub s_above: f64,
    pub levels: Vec<DichotomyLevel>,
    /// `log2` level contribution against `j` over `j >= 2`.
    pub fit_below: LinearFit,
    pub fit_above: LinearFit,
    /// Level contributions decay geometrically (slope below zero at 95%).
    pub bounded_below: bool,
    /// Level contributions grow geometrically and the truncated norm
    /// increases with every level.
    pub increasing_above: bool,
}

/// Monte Carlo `E ||xi||^2_{B^s_{2,2}}` as a function of the truncation level
/// at `s = H - 1 -+ offset`.
pub fn besov_dichotomy_report(
    spec: &FbmSpec,
    offset: f64,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<BesovDichotomyReport> {
    if spec.max_level < 4 {
        return domain("need at least levels 0..=4");
    }
    if samples < 2 {
        return Err(crate::Error::InsufficientSamples { needed: 2, got: samples });
    }
    let sampler = FbmSampler::cached(spec)?;
    let s_below = spec.critical_smoothness() - offset;
    let s_above = spec.critical_smoothness() + offset;
    let (pb, pa) = (BesovParams::new(s_below, 2.0)?, BesovParams::new(s_above, 2.0)?);
    let sums: Vec<(f64, Vec<f64>)> = exec.map(samples, |m| {
        let f = sampler.sample(seed::derive(seed, &[seed::stream::ENSEMBLE, m as u64]));
        (f.coarse() * f.coarse(), (0..=spec.max_level).map(|j| f.level_p_sum(j, 2.0)).collect())
    });
    let coarse = stats::mean(&sums.iter().map(|s| s.0).collect::<Vec<_>>());
    let mut levels = Vec::new();
    let (mut cb, mut ca) = (coarse, coarse);
    for j in 0..=spec.max_level {
        let mean = stats::mean(&sums.iter().map(|s| s.1[j as usize]).collect::<Vec<_>>());
        let below = pb.level_weight(j) * mean;
        let above = pa.level_weight(j) * mean;
        cb += below;
        ca += above;
        levels.push(DichotomyLevel { j, below, above, cumulative_below: cb, cumulative_above: ca });
    }
    let fit = |pick: fn(&DichotomyLevel) -> f64| {
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            levels.iter().filter(|l| l.j >= 2).map(|l| (l.j as f64, pick(l).log2())).unzip();
        LinearFit::fit(&xs, &ys)
    };
    let fit_below = fit(|l| l.below);
    let fit_above = fit(|l| l.above);
    let bounded_below = fit_below.slope + fit_below.band() < 0.0;
    let increasing_above = fit_above.slope - fit_above.band() > 0.0
        && levels.windows(2).all(|w| w[1].cumulative_above > w[0].cumulative_above);
    Ok(BesovDichotomyReport {
        hurst: spec.hurst,
        max_level: spec.max_level,
        samples,
        s_below,
        s_above,
        levels,
        fit_below,
        fit_above,
        bounded_below,
        increasing_above,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{build_level_covariance, covariance_between, HaarFunction};

    #[test]
    fn empirical_variances_and_means() {
        let spec = FbmSpec::new(0.75, 4).unwrap();
        let sampler = FbmSampler::new(&spec).unwrap();
        let draws: Vec<Vec<f64>> = (0..10_000u64).map(|m| sampler.sample(m).to_vec()).collect();
        let coarse_var = covariance_between(&spec, HaarFunction::Coarse, HaarFunction::Coarse).unwrap();
        let mut offset = 1;
        let mut expected = vec![coarse_var];
        for j in 0..=4 {
            let c = build_level_covariance(&spec, j).unwrap();
            expected.extend(c.matrix.diagonal().iter());
            offset += 1 << j;
        }
        assert_eq!(offset, sampler.dimension());
        let n = draws.len() as f64;
        for (i, var) in expected.iter().enumerate() {
            let xs: Vec<f64> = draws.iter().map(|d| d[i]).collect();
            let m = stats::mean(&xs);
            assert!(m.abs() < 3.0 * (var / n).sqrt() + 1e-12, "mean {i}");
            let v = xs.iter().map(|x| x * x).sum::<f64>() / n;
            assert!((v - var).abs() < 3.0 * (2.0 / n).sqrt() * var, "var {i}: {v} vs {var}");
        }
    }

    #[test]
    fn coefficients_pass_normality() {
        let spec = FbmSpec::new(0.75, 3).unwrap();
        let sampler = FbmSampler::new(&spec).unwrap();
        let draws: Vec<Vec<f64>> = (0..10_000u64).map(|m| sampler.sample(m).to_vec()).collect();
        let dim = sampler.dimension();
        for i in 0..dim {
            let xs: Vec<f64> = draws.iter().map(|d| d[i]).collect();
            let ad = stats::anderson_darling_normal(&xs);
            // Bonferroni over all coefficients
            assert!(ad.p_value > 0.01 / dim as f64, "coefficient {i}: p = {}", ad.p_value);
        }
    }

    #[test]
    fn deterministic_and_validated() {
        let spec = FbmSpec::new(0.7, 3).unwrap();
        assert_eq!(sample_coefficients(&spec, 4).unwrap(), sample_coefficients(&spec, 4).unwrap());
        assert_ne!(sample_coefficients(&spec, 4).unwrap(), sample_coefficients(&spec, 5).unwrap());
        assert!(FbmSpec::new(0.5, 3).is_err());
        assert!(FbmSpec::new(1.0, 3).is_err());
        let sampler = FbmSampler::new(&spec).unwrap();
        assert!(sampler.transform(&[0.0; 3]).is_err());
    }

    #[test]
    fn dichotomy_small() {
        let spec = FbmSpec::new(0.75, 7).unwrap();
        let r = besov_dichotomy_report(&spec, 0.15, 400, 1, Exec::Parallel).unwrap();
        assert!(r.bounded_below && r.increasing_above);
        assert!((r.fit_below.slope + 0.3).abs() < 0.1);
        assert!((r.fit_above.slope - 0.3).abs() < 0.1);
    }
}
