//! Pointwise values of compactly supported scaling functions and wavelets.
//!
//! Integer samples of `phi` come from the eigenvector of the refinement
//! matrix for eigenvalue 1 (normalized to sum 1); each refinement pass then
//! fills in the next dyadic level through `phi(x) = sqrt(2) sum_k p_k phi(2x - k)`.
//! After `levels` passes `phi` is known on the grid `2^-levels Z` and `psi`
//! on `2^-(levels-1) Z`. Off-grid points are linearly interpolated.

use nalgebra::{DMatrix, DVector};

use super::filters::wavelet_filter;

pub const DEFAULT_LEVELS: u32 = 12;

#[derive(Debug, Clone)]
pub struct Cascade {
    /// Support of both functions is `[0, support]`.
    pub support: usize,
    phi: Vec<f64>,
    phi_levels: u32,
    psi: Vec<f64>,
    psi_levels: u32,
}

impl Cascade {
    pub fn new(filter: &[f64], levels: u32) -> Cascade {
        assert!(levels >= 1 && filter.len() >= 2);
        let len = filter.len();
        let support = len - 1;
        let s2 = std::f64::consts::SQRT_2;
        let tap = |i: i64| -> f64 {
            if i >= 0 && (i as usize) < len { filter[i as usize] } else { 0.0 }
        };

        // (A - I) x = 0 with the last row replaced by sum(x) = 1.
        let n = support + 1;
        let mut a = DMatrix::<f64>::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                a[(r, c)] = s2 * tap(2 * r as i64 - c as i64) - if r == c { 1.0 } else { 0.0 };
            }
        }
        for c in 0..n {
            a[(n - 1, c)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(n);
        rhs[n - 1] = 1.0;
        let integer_values = if len == 2 {
            // Haar: right-continuous box, phi(0) = 1, phi(1) = 0
            DVector::from_vec(vec![1.0, 0.0])
        } else {
            a.lu().solve(&rhs).expect("refinement matrix is singular")
        };

        let total = support << levels;
        let mut phi = vec![0.0; total + 1];
        for (i, v) in integer_values.iter().enumerate() {
            phi[i << levels] = *v;
        }
        for r in 1..=levels {
            let stride = 1usize << (levels - r);
            // odd multiples of 2^-r
            let mut m = stride;
            while m < total {
                // 2x - k in grid units: 2m - k * 2^levels
                let mut acc = 0.0;
                for (k, p) in filter.iter().enumerate() {
                    let idx = 2 * m as i64 - ((k as i64) << levels);
                    if idx >= 0 && (idx as usize) <= total {
                        acc += p * phi[idx as usize];
                    }
                }
                phi[m] = s2 * acc;
                m += 2 * stride;
            }
        }

        let g = wavelet_filter(filter);
        let psi_levels = levels - 1;
        let psi_total = support << psi_levels;
        let psi = (0..=psi_total)
            .map(|m| {
                // x = m 2^-(levels-1); 2x - k on the phi grid is 4m - k 2^levels
                let mut acc = 0.0;
                for (k, gk) in g.iter().enumerate() {
                    let idx = 4 * m as i64 - ((k as i64) << levels);
                    if idx >= 0 && (idx as usize) <= total {
                        acc += gk * phi[idx as usize];
                    }
                }
                s2 * acc
            })
            .collect();

        Cascade { support, phi, phi_levels: levels, psi, psi_levels }
    }

    pub fn phi(&self, x: f64) -> f64 {
        interpolate(&self.phi, self.phi_levels, self.support, x)
    }

    pub fn psi(&self, x: f64) -> f64 {
        interpolate(&self.psi, self.psi_levels, self.support, x)
    }

    /// Samples of `phi` on `2^-levels Z ∩ [0, support]`.
    pub fn phi_samples(&self) -> (&[f64], u32) {
        (&self.phi, self.phi_levels)
    }
}

fn interpolate(values: &[f64], levels: u32, support: usize, x: f64) -> f64 {
    if !(0.0..=support as f64).contains(&x) {
        return 0.0;
    }
    let pos = x * (1u64 << levels) as f64;
    let i = pos.floor() as usize;
    if i + 1 >= values.len() {
        return values[values.len() - 1];
    }
    let w = pos - i as f64;
    values[i] * (1.0 - w) + values[i + 1] * w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::filters::daubechies;

    #[test]
    fn haar_cascade_is_box_and_step() {
        let c = Cascade::new(&daubechies(1).unwrap(), 8);
        assert!((c.phi(0.3) - 1.0).abs() < 1e-12);
        assert!((c.psi(0.25) - 1.0).abs() < 1e-12);
        assert!((c.psi(0.75) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn partition_of_unity_and_refinement_residual() {
        for order in 2..=6 {
            let p = daubechies(order).unwrap();
            let c = Cascade::new(&p, 10);
            let (phi, levels) = c.phi_samples();
            let step = 1usize << levels;
            // sum_n phi(x + n) = 1 at every grid point of [0, 1)
            for m in (0..step).step_by(37) {
                let s: f64 = (0..c.support).map(|n| phi[m + n * step]).sum();
                assert!((s - 1.0).abs() < 1e-10, "order {order}: {s}");
            }
            // refinement equation holds exactly on the coarser grid
            let s2 = std::f64::consts::SQRT_2;
            for m in (0..phi.len()).step_by(2 * 53) {
                let x = m as f64 / step as f64;
                let rhs: f64 = p.iter().enumerate().map(|(k, pk)| s2 * pk * c.phi(2.0 * x - k as f64)).sum();
                assert!((phi[m] - rhs).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn psi_has_unit_norm_and_zero_mean() {
        for order in 2..=4 {
            let c = Cascade::new(&daubechies(order).unwrap(), 12);
            let n = 1 << 14;
            let h = c.support as f64 / n as f64;
            let (mut m0, mut m2) = (0.0, 0.0);
            for i in 0..n {
                let v = c.psi((i as f64 + 0.5) * h);
                m0 += v * h;
                m2 += v * v * h;
            }
            assert!(m0.abs() < 1e-4, "order {order}: mean {m0}");
            assert!((m2 - 1.0).abs() < 1e-3, "order {order}: norm {m2}");
        }
    }
}
