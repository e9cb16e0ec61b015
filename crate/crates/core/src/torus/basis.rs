//! Real trigonometric Stokes eigenbasis on `[0, 2pi)^2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Sin,
    Cos,
    /// `e_0^1`, constant in direction `(1, 0)`.
    Const1,
    /// `e_0^2`, constant in direction `(0, 1)`.
    Const2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeIndex {
    pub j1: i32,
    pub j2: i32,
    pub parity: Parity,
}

/// `1 / (pi sqrt 2)`: L2-normalizes `sin(j.x) u` and `cos(j.x) u` for unit `u`.
pub const OSCILLATORY_AMPLITUDE: f64 = 1.0 / (PI * std::f64::consts::SQRT_2);
/// `1 / (2 pi)`: L2-normalizes the constant modes.
pub const CONSTANT_AMPLITUDE: f64 = 1.0 / (2.0 * PI);

/// `{j1 > 0} u {j1 = 0, j2 > 0}`
pub fn in_half_lattice(j1: i32, j2: i32) -> bool {
    j1 > 0 || (j1 == 0 && j2 > 0)
}

impl ModeIndex {
    pub fn new(j1: i32, j2: i32, parity: Parity) -> Result<ModeIndex> {
        let m = ModeIndex { j1, j2, parity };
        m.validate()?;
        Ok(m)
    }

    pub fn sin(j1: i32, j2: i32) -> Result<ModeIndex> {
        ModeIndex::new(j1, j2, Parity::Sin)
    }

    pub fn cos(j1: i32, j2: i32) -> Result<ModeIndex> {
        ModeIndex::new(j1, j2, Parity::Cos)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.parity {
            Parity::Sin | Parity::Cos => in_half_lattice(self.j1, self.j2),
            Parity::Const1 | Parity::Const2 => self.j1 == 0 && self.j2 == 0,
        };
        if ok {
            Ok(())
        } else {
            domain(format!("no {:?} mode at ({}, {})", self.parity, self.j1, self.j2))
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.parity, Parity::Const1 | Parity::Const2)
    }

    /// `j_perp = (-j2, j1)`
    pub fn perpendicular(&self) -> (i32, i32) {
        (-self.j2, self.j1)
    }

    /// `j_perp / |j|`, or the constant direction for `e_0^1`, `e_0^2`.
    pub fn direction(&self) -> (f64, f64) {
        match self.parity {
            Parity::Const1 => (1.0, 0.0),
            Parity::Const2 => (0.0, 1.0),
            _ => {
                let norm = (self.norm_sq() as f64).sqrt();
                (-self.j2 as f64 / norm, self.j1 as f64 / norm)
            }
        }
    }

    pub fn norm_sq(&self) -> i64 {
        let (a, b) = (self.j1 as i64, self.j2 as i64);
        a * a + b * b
    }
}

/// Value of the L2-normalized eigenfunction at `x`.
pub fn eigenfunction_eval(mode: ModeIndex, x: (f64, f64)) -> Result<(f64, f64)> {
    mode.validate()?;
    let two_pi = 2.0 * PI;
    if !((0.0..two_pi).contains(&x.0) && (0.0..two_pi).contains(&x.1)) {
        return domain(format!("point ({}, {}) outside [0, 2pi)^2", x.0, x.1));
    }
    Ok(eval_unchecked(mode, x))
}

pub(crate) fn eval_unchecked(mode: ModeIndex, x: (f64, f64)) -> (f64, f64) {
    let (d1, d2) = mode.direction();
    let phase = mode.j1 as f64 * x.0 + mode.j2 as f64 * x.1;
    let a = match mode.parity {
        Parity::Sin => OSCILLATORY_AMPLITUDE * phase.sin(),
        Parity::Cos => OSCILLATORY_AMPLITUDE * phase.cos(),
        Parity::Const1 | Parity::Const2 => CONSTANT_AMPLITUDE,
    };
    (a * d1, a * d2)
}

/// Symbol of the Stokes operator: `|j|^2`, zero for constant modes.
pub fn stokes_eigenvalue(mode: ModeIndex) -> f64 {
    if mode.is_constant() {
        0.0
    } else {
        mode.norm_sq() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_modes() {
        let e1 = ModeIndex::new(0, 0, Parity::Const1).unwrap();
        for x in [(0.0, 0.0), (1.0, 2.0), (6.0, 0.5)] {
            let v = eigenfunction_eval(e1, x).unwrap();
            assert_eq!(v.1, 0.0);
            assert!(v.0 > 0.0);
        }
        assert_eq!(stokes_eigenvalue(e1), 0.0);
    }

    #[test]
    fn validation() {
        assert!(ModeIndex::sin(0, -1).is_err());
        assert!(ModeIndex::cos(-1, 3).is_err());
        assert!(ModeIndex::sin(0, 0).is_err());
        assert!(ModeIndex::new(1, 0, Parity::Const1).is_err());
        assert!(ModeIndex::sin(0, 2).is_ok());
        assert!(eigenfunction_eval(ModeIndex::sin(1, 0).unwrap(), (7.0, 0.0)).is_err());
    }

    #[test]
    fn eigenvalues() {
        assert_eq!(stokes_eigenvalue(ModeIndex::sin(1, 0).unwrap()), 1.0);
        assert_eq!(stokes_eigenvalue(ModeIndex::cos(1, 1).unwrap()), 2.0);
        let mut modes: Vec<ModeIndex> = Vec::new();
        for j1 in 0..=5 {
            for j2 in -5..=5 {
                if in_half_lattice(j1, j2) && j1 * j1 + j2 * j2 <= 25 {
                    modes.push(ModeIndex::sin(j1, j2).unwrap());
                }
            }
        }
        modes.sort_by_key(|m| m.norm_sq());
        let ev: Vec<f64> = modes.iter().map(|m| stokes_eigenvalue(*m)).collect();
        assert!(ev.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn divergence_free() {
        let h = 1e-5;
        for (j1, j2) in [(1, 0), (0, 3), (2, -1), (3, 4)] {
            for parity in [Parity::Sin, Parity::Cos] {
                let m = ModeIndex::new(j1, j2, parity).unwrap();
                for x in [(0.3, 1.1), (2.0, 5.0), (4.4, 0.7)] {
                    let dx = (eval_unchecked(m, (x.0 + h, x.1)).0 - eval_unchecked(m, (x.0 - h, x.1)).0) / (2.0 * h);
                    let dy = (eval_unchecked(m, (x.0, x.1 + h)).1 - eval_unchecked(m, (x.0, x.1 - h)).1) / (2.0 * h);
                    assert!((dx + dy).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn gram_matrix_is_identity() {
        let modes = [
            ModeIndex::new(0, 0, Parity::Const1).unwrap(),
            ModeIndex::new(0, 0, Parity::Const2).unwrap(),
            ModeIndex::sin(1, 0).unwrap(),
            ModeIndex::cos(1, 0).unwrap(),
            ModeIndex::sin(0, 1).unwrap(),
            ModeIndex::sin(1, 1).unwrap(),
            ModeIndex::cos(1, -1).unwrap(),
            ModeIndex::sin(2, 1).unwrap(),
            ModeIndex::cos(2, 1).unwrap(),
            ModeIndex::sin(1, -2).unwrap(),
        ];
        // the trapezoidal rule on a uniform periodic grid is exact for these
        let n = 32;
        let h = 2.0 * PI / n as f64;
        for a in &modes {
            for b in &modes {
                let mut s = 0.0;
                for i in 0..n {
                    for k in 0..n {
                        let x = (i as f64 * h, k as f64 * h);
                        let (u, v) = (eval_unchecked(*a, x), eval_unchecked(*b, x));
                        s += (u.0 * v.0 + u.1 * v.1) * h * h;
                    }
                }
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((s - expected).abs() < 1e-10, "{a:?} {b:?} {s}");
            }
        }
    }
}
