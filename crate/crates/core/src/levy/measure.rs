//! Symmetric truncated power-law Lévy measures and their compound-Poisson
//! jump samples.

use rand::Rng as _;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::seed::{self, Rng};

/// `nu(dz) = c |z|^{-1-alpha} 1_{|z| <= z_max} dz`, slowly varying part fixed to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyMeasureSpec {
    pub alpha: f64,
    pub amplitude: f64,
    /// `None` means no cutoff.
    #[serde(default)]
    pub cutoff: Option<f64>,
}

impl LevyMeasureSpec {
    pub fn new(alpha: f64, amplitude: f64, cutoff: Option<f64>) -> Result<LevyMeasureSpec> {
        let spec = LevyMeasureSpec { alpha, amplitude, cutoff };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return domain(format!("stability alpha = {} must lie in (0, 2)", self.alpha));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return domain(format!("amplitude {} must be positive", self.amplitude));
        }
        if let Some(z) = self.cutoff {
            if !(z > 0.0) {
                return domain(format!("cutoff {z} must be positive"));
            }
        }
        Ok(())
    }

    pub fn z_max(&self) -> f64 {
        self.cutoff.unwrap_or(f64::INFINITY)
    }

    /// `rho_eps = nu(R \ [-eps, eps]) = (2c/alpha)(eps^-alpha - z_max^-alpha)`.
    pub fn tail_mass(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0) {
            return domain(format!("truncation level {eps} must be positive"));
        }
        Ok(self.band_mass(eps, self.z_max()))
    }

    /// `nu({lo < |z| <= hi})` for `0 < lo`, clipped to the support.
    pub fn band_mass(&self, lo: f64, hi: f64) -> f64 {
        let hi = hi.min(self.z_max());
        if lo >= hi {
            return 0.0;
        }
        let a = self.alpha;
        2.0 * self.amplitude / a * (lo.powf(-a) - hi.powf(-a))
    }

    /// `int_{lo < |z| <= hi} |z|^q nu(dz)`.
    pub fn band_moment(&self, q: f64, lo: f64, hi: f64) -> f64 {
        let hi = hi.min(self.z_max());
        if lo >= hi {
            return 0.0;
        }
        let e = q - self.alpha;
        if e.abs() < 1e-12 {
            return 2.0 * self.amplitude * (hi / lo).ln();
        }
        if hi.is_infinite() {
            return if e < 0.0 { 2.0 * self.amplitude * (-lo.powf(e)) / e } else { f64::INFINITY };
        }
        2.0 * self.amplitude * (hi.powf(e) - lo.powf(e)) / e
    }

    /// Variance rate `int_{|z| <= eps0} z^2 nu(dz)` of the jumps below `eps0`.
    pub fn small_jump_variance(&self, eps0: f64) -> f64 {
        let top = eps0.min(self.z_max());
        2.0 * self.amplitude * top.powf(2.0 - self.alpha) / (2.0 - self.alpha)
    }

    /// CDF of `|Y|` under `nu_eps / rho_eps`.
    pub fn jump_size_cdf(&self, eps: f64, y: f64) -> f64 {
        if y <= eps {
            return 0.0;
        }
        let a = self.alpha;
        let lo = eps.powf(-a);
        let hi = self.z_max().powf(-a);
        ((lo - y.powf(-a)) / (lo - hi)).clamp(0.0, 1.0)
    }

    /// Inverse of [`jump_size_cdf`](Self::jump_size_cdf).
    pub fn jump_size_quantile(&self, eps: f64, u: f64) -> f64 {
        let a = self.alpha;
        let lo = eps.powf(-a);
        let hi = self.z_max().powf(-a);
        (lo - u * (lo - hi)).powf(-1.0 / a)
    }
}

/// Jumps of the `eps`-truncated Poisson random measure on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpSample {
    pub eps: f64,
    pub horizon: f64,
    pub times: Vec<f64>,
    pub sizes: Vec<f64>,
}

impl JumpSample {
    pub fn empty(eps: f64, horizon: f64) -> JumpSample {
        JumpSample { eps, horizon, times: Vec::new(), sizes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Thins the stream to jumps with `|Y| > eps`, which is again a sample of
    /// the `eps`-truncated measure. Raising the truncation is the only
    /// coupled direction; lowering it is rejected.
    pub fn restrict(&self, eps: f64) -> Result<JumpSample> {
        if eps < self.eps {
            return Err(Error::Uncoupled(format!(
                "cannot lower truncation from {} to {eps} on an existing stream",
                self.eps
            )));
        }
        let (times, sizes) = self
            .times
            .iter()
            .zip(&self.sizes)
            .filter(|(_, y)| y.abs() > eps)
            .map(|(t, y)| (*t, *y))
            .unzip();
        Ok(JumpSample { eps, horizon: self.horizon, times, sizes })
    }

    /// Jumps with `lo < |Y| <= hi`.
    pub fn band(&self, lo: f64, hi: f64) -> JumpSample {
        let (times, sizes) = self
            .times
            .iter()
            .zip(&self.sizes)
            .filter(|(_, y)| y.abs() > lo && y.abs() <= hi)
            .map(|(t, y)| (*t, *y))
            .unzip();
        JumpSample { eps: lo, horizon: self.horizon, times, sizes }
    }

    /// Value of the pure-jump path `L(t) = sum_{tau_n <= t} Y_n`.
    pub fn path_value(&self, t: f64) -> f64 {
        self.times.iter().zip(&self.sizes).filter(|(tau, _)| **tau <= t).map(|(_, y)| y).sum()
    }
}

pub fn sample_jumps(spec: &LevyMeasureSpec, eps: f64, horizon: f64, rng: &mut Rng) -> Result<JumpSample> {
    let rho = spec.tail_mass(eps)?;
    if rho == 0.0 {
        return Ok(JumpSample::empty(eps, horizon));
    }
    let count = Poisson::new(rho * horizon)
        .map_err(|e| Error::Domain(format!("Poisson rate: {e}")))?
        .sample(rng) as usize;
    let mut times = Vec::with_capacity(count);
    let mut sizes = Vec::with_capacity(count);
    for _ in 0..count {
        times.push(rng.random::<f64>() * horizon);
        let magnitude = spec.jump_size_quantile(eps, rng.random::<f64>());
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        sizes.push(sign * magnitude);
    }
    Ok(JumpSample { eps, horizon, times, sizes })
}

/// Jumps on `[0, 1]`, deterministic in `seed`.
pub fn sample_large_jumps(spec: &LevyMeasureSpec, eps: f64, seed: u64) -> Result<JumpSample> {
    spec.validate()?;
    let mut rng = seed::rng(seed, &[seed::stream::JUMPS]);
    sample_jumps(spec, eps, 1.0, &mut rng)
}
