//! Mean-zero divergence-free velocity fields in the real basis.

use serde::{Deserialize, Serialize};

use super::basis::{eval_unchecked, in_half_lattice, ModeIndex, Parity};
use crate::error::{domain, Error, Result};

/// `u = sum c_m e_m` over oscillatory modes with `|j|_inf <= truncation`.
/// Coefficients are ordered by half-lattice site (`j1 = 0` first, then by
/// `j1`, `j2`), sin before cos.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralVelocity {
    truncation: u32,
    coeffs: Vec<f64>,
}

/// Half-lattice sites with `|j|_inf <= n`.
pub(crate) fn site_count(n: u32) -> usize {
    let n = n as usize;
    n + n * (2 * n + 1)
}

pub(crate) fn site_index(n: u32, j1: i32, j2: i32) -> Option<usize> {
    let ni = n as i32;
    if !in_half_lattice(j1, j2) || j1 > ni || j2.abs() > ni {
        return None;
    }
    Some(if j1 == 0 { (j2 - 1) as usize } else { n as usize + (j1 as usize - 1) * (2 * n as usize + 1) + (j2 + ni) as usize })
}

pub(crate) fn site_at(n: u32, s: usize) -> (i32, i32) {
    let nu = n as usize;
    if s < nu {
        (0, s as i32 + 1)
    } else {
        let r = s - nu;
        let w = 2 * nu + 1;
        ((r / w) as i32 + 1, (r % w) as i32 - n as i32)
    }
}

impl SpectralVelocity {
    pub fn zeros(truncation: u32) -> SpectralVelocity {
        SpectralVelocity { truncation, coeffs: vec![0.0; 2 * site_count(truncation)] }
    }

    pub fn from_coeffs(truncation: u32, coeffs: Vec<f64>) -> Result<SpectralVelocity> {
        if coeffs.len() != 2 * site_count(truncation) {
            return domain(format!("{} coefficients do not fit truncation {truncation}", coeffs.len()));
        }
        Ok(SpectralVelocity { truncation, coeffs })
    }

    pub fn from_modes(truncation: u32, modes: &[(ModeIndex, f64)]) -> Result<SpectralVelocity> {
        let mut u = SpectralVelocity::zeros(truncation);
        for (m, c) in modes {
            u.set(*m, *c)?;
        }
        Ok(u)
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn index_of(&self, mode: ModeIndex) -> Option<usize> {
        let offset = match mode.parity {
            Parity::Sin => 0,
            Parity::Cos => 1,
            _ => return None,
        };
        site_index(self.truncation, mode.j1, mode.j2).map(|s| 2 * s + offset)
    }

    pub fn mode_at(&self, i: usize) -> ModeIndex {
        let (j1, j2) = site_at(self.truncation, i / 2);
        ModeIndex { j1, j2, parity: if i.is_multiple_of(2) { Parity::Sin } else { Parity::Cos } }
    }

    pub fn modes(&self) -> impl Iterator<Item = (ModeIndex, f64)> + '_ {
        self.coeffs.iter().enumerate().map(|(i, c)| (self.mode_at(i), *c))
    }

    fn checked_index(&self, mode: ModeIndex) -> Result<usize> {
        mode.validate()?;
        self.index_of(mode)
            .ok_or_else(|| Error::Domain(format!("mode {mode:?} outside truncation {}", self.truncation)))
    }

    pub fn get(&self, mode: ModeIndex) -> Result<f64> {
        Ok(self.coeffs[self.checked_index(mode)?])
    }

    pub fn set(&mut self, mode: ModeIndex, value: f64) -> Result<()> {
        let i = self.checked_index(mode)?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// `|u|^2_{L2}`
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// `|grad u|^2_{L2} = sum |j|^2 c_j^2`
    pub fn enstrophy(&self) -> f64 {
        self.modes().map(|(m, c)| m.norm_sq() as f64 * c * c).sum()
    }

    pub fn dot(&self, other: &SpectralVelocity) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum())
    }

    pub(crate) fn check_same(&self, other: &SpectralVelocity) -> Result<()> {
        if self.truncation != other.truncation {
            return Err(Error::TruncationMismatch { left: self.truncation as usize, right: other.truncation as usize });
        }
        Ok(())
    }

    pub fn axpy(&mut self, a: f64, x: &SpectralVelocity) -> Result<()> {
        self.check_same(x)?;
        for (y, v) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *y += a * v;
        }
        Ok(())
    }

    pub fn scaled(&self, a: f64) -> SpectralVelocity {
        SpectralVelocity { truncation: self.truncation, coeffs: self.coeffs.iter().map(|c| a * c).collect() }
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Same field on another truncation: padded with zeros or cut off.
    pub fn retruncate(&self, truncation: u32) -> SpectralVelocity {
        let mut out = SpectralVelocity::zeros(truncation);
        for (m, c) in self.modes() {
            if let Some(i) = out.index_of(m) {
                out.coeffs[i] = c;
            }
        }
        out
    }

    /// Pointwise value at `x` (any real coordinates, periodic).
    pub fn eval(&self, x: (f64, f64)) -> (f64, f64) {
        self.modes().filter(|(_, c)| *c != 0.0).fold((0.0, 0.0), |acc, (m, c)| {
            let v = eval_unchecked(m, x);
            (acc.0 + c * v.0, acc.1 + c * v.1)
        })
    }
}
