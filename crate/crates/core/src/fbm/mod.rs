//! Haar coefficients of fractional Gaussian noise with Hurst index in (1/2, 1).

mod covariance;
mod fgn;
mod sample;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub use covariance::{
    build_level_covariance, covariance_between, covariance_entry, joint_covariance, joint_layout, HaarFunction,
    LevelCovariance, PSD_TOLERANCE,
};
pub use fgn::{fbm_increments_on_grid, fgn_autocovariance, fgn_increments};
pub use sample::{besov_dichotomy_report, sample_coefficients, BesovDichotomyReport, FbmSampler};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FbmSpec {
    pub hurst: f64,
    pub max_level: u32,
}

impl FbmSpec {
    pub fn new(hurst: f64, max_level: u32) -> Result<FbmSpec> {
        let s = FbmSpec { hurst, max_level };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hurst > 0.5 && self.hurst < 1.0) {
            return domain(format!("Hurst index {} outside (1/2, 1)", self.hurst));
        }
        if self.max_level > 14 {
            return domain(format!("max level {} too large for dense covariances", self.max_level));
        }
        Ok(())
    }

    /// `H(2H - 1)`, so that `Var B^H(1) = 1`.
    pub fn kernel_constant(&self) -> f64 {
        self.hurst * (2.0 * self.hurst - 1.0)
    }

    /// Besov smoothness threshold `H - 1`.
    pub fn critical_smoothness(&self) -> f64 {
        self.hurst - 1.0
    }
}
