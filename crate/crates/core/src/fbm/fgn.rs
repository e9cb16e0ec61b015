//! Fractional Gaussian noise on a uniform grid by the Durbin-Levinson
//! recursion: the exact Cholesky factorization of the Toeplitz covariance,
//! applied row by row in O(n) memory.

use rand_distr::{Distribution, StandardNormal};

use super::FbmSpec;
use crate::error::{domain, Result};
use crate::seed::{self, Rng};

/// Unit-step fGn autocovariance `(|k+1|^2H - 2|k|^2H + |k-1|^2H) / 2`.
pub fn fgn_autocovariance(hurst: f64, lag: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = lag as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// Maps standard normals to unit-step fGn; `x = L z` with `L L^T` the
/// Toeplitz covariance.
pub(crate) fn fgn_from_normals(hurst: f64, z: &[f64]) -> Vec<f64> {
    let n = z.len();
    let gamma: Vec<f64> = (0..n).map(|k| fgn_autocovariance(hurst, k)).collect();
    let mut x = Vec::with_capacity(n);
    if n == 0 {
        return x;
    }
    let mut v = gamma[0];
    x.push(v.sqrt() * z[0]);
    let mut phi: Vec<f64> = Vec::with_capacity(n);
    let mut prev: Vec<f64> = Vec::with_capacity(n);
    for t in 1..n {
        let acc: f64 = (0..t - 1).map(|j| phi[j] * gamma[t - 1 - j]).sum();
        let k = (gamma[t] - acc) / v;
        prev.clear();
        prev.extend_from_slice(&phi);
        for j in 0..t - 1 {
            phi[j] = prev[j] - k * prev[t - 2 - j];
        }
        phi.push(k);
        v *= 1.0 - k * k;
        let mean: f64 = (0..t).map(|j| phi[j] * x[t - 1 - j]).sum();
        x.push(mean + v.max(0.0).sqrt() * z[t]);
    }
    x
}

/// `n` increments of standard fBm over `[0, horizon]`; `hurst` in (0, 1).
pub fn fgn_increments(hurst: f64, n: usize, horizon: f64, rng: &mut Rng) -> Result<Vec<f64>> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return domain(format!("Hurst index {hurst} outside (0, 1)"));
    }
    if !(horizon > 0.0) {
        return domain("horizon must be positive");
    }
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let scale = (horizon / n as f64).powf(hurst);
    Ok(fgn_from_normals(hurst, &z).into_iter().map(|x| x * scale).collect())
}

/// Increments of `B^H` on the uniform grid of `[0, 1]` with `n_steps` cells.
pub fn fbm_increments_on_grid(spec: &FbmSpec, n_steps: usize, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    if !n_steps.is_power_of_two() {
        return domain(format!("step count {n_steps} is not a power of two"));
    }
    let mut rng = seed::rng(seed, &[seed::stream::FBM]);
    fgn_increments(spec.hurst, n_steps, 1.0, &mut rng)
}
