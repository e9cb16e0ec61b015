//! Gaussian kernel density estimates on regular grids and L1 distances.

use serde::{Deserialize, Serialize};

use super::atoms::robust_scale;
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum Bandwidth {
    Silverman,
    /// One bandwidth per coordinate, or a single value for all.
    Explicit { h: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub start: f64,
    pub step: f64,
    pub points: usize,
}

impl GridAxis {
    pub fn at(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }
}

/// Points per axis at most, by dimension 1, 2, 3.
const MAX_POINTS: [usize; 3] = [8192, 512, 96];
/// Grid spacing at most `h / STEPS_PER_BANDWIDTH` unless capped.
const STEPS_PER_BANDWIDTH: f64 = 4.0;
/// Grid margin beyond the sample range, in bandwidths.
const MARGIN: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub axes: Vec<GridAxis>,
    pub bandwidth: Vec<f64>,
    /// Row-major over the axes, last axis fastest.
    pub values: Vec<f64>,
}

impl DensityEstimate {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.step).product()
    }

    /// Riemann sum of the estimate over the grid.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }
}

fn check_rows(rows: &[Vec<f64>]) -> Result<usize> {
    if rows.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: rows.len() });
    }
    let d = rows[0].len();
    if !(1..=3).contains(&d) || rows.iter().any(|r| r.len() != d) {
        return domain("gridded density estimates need rows of a common dimension 1 to 3");
    }
    Ok(d)
}

/// Per-coordinate bandwidths; a zero-spread coordinate is a degenerate sample.
pub fn bandwidths(rows: &[Vec<f64>], rule: &Bandwidth) -> Result<Vec<f64>> {
    let d = check_rows(rows)?;
    let h = match rule {
        Bandwidth::Explicit { h } if h.len() == 1 => vec![h[0]; d],
        Bandwidth::Explicit { h } if h.len() == d => h.clone(),
        Bandwidth::Explicit { .. } => return domain("explicit bandwidth length must be 1 or dim"),
        Bandwidth::Silverman => {
            let m = rows.len() as f64;
            // Silverman in 1-d, Scott-type normal reference in higher dimensions
            let factor = if d == 1 { 0.9 * m.powf(-0.2) } else { (4.0 / ((d as f64 + 2.0) * m)).powf(1.0 / (d as f64 + 4.0)) };
            (0..d)
                .map(|c| {
                    let col: Vec<f64> = rows.iter().map(|r| r[c]).collect();
                    factor * robust_scale(&col)
                })
                .collect()
        }
    };
    for (c, v) in h.iter().enumerate() {
        if !(v.is_finite() && *v > 0.0) {
            return Err(Error::Degenerate(format!("coordinate {c} has no spread (bandwidth {v})")));
        }
    }
    Ok(h)
}

/// Grid covering every sample's range plus three bandwidths.
pub fn common_grid(samples: &[&[Vec<f64>]], h: &[f64]) -> Result<Vec<GridAxis>> {
    let d = h.len();
    let cap = MAX_POINTS[d - 1];
    (0..d)
        .map(|c| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for s in samples {
                if check_rows(s)? != d {
                    return domain("samples differ in dimension");
                }
                for r in s.iter() {
                    lo = lo.min(r[c]);
                    hi = hi.max(r[c]);
                }
            }
            let (lo, hi) = (lo - MARGIN * h[c], hi + MARGIN * h[c]);
            let want = ((hi - lo) * STEPS_PER_BANDWIDTH / h[c]).ceil() as usize + 1;
            let points = want.clamp(2, cap);
            Ok(GridAxis { start: lo, step: (hi - lo) / (points - 1) as f64, points })
        })
        .collect()
}

/// Product-Gaussian KDE evaluated on `axes`.
pub fn kde_on_grid(rows: &[Vec<f64>], h: &[f64], axes: &[GridAxis]) -> Result<DensityEstimate> {
    let d = check_rows(rows)?;
    if h.len() != d || axes.len() != d {
        return domain("bandwidth and grid dimension must match the sample");
    }
    let m = rows.len() as f64;
    let norm: f64 = h.iter().map(|hc| hc * (2.0 * std::f64::consts::PI).sqrt()).product::<f64>() * m;
    let total: usize = axes.iter().map(|a| a.points).product();
    let mut values = vec![0.0; total];
    let mut kernel: Vec<Vec<f64>> = axes.iter().map(|a| vec![0.0; a.points]).collect();
    let mut support: Vec<(usize, usize)> = vec![(0, 0); d];
    for r in rows {
        // kernel factors per axis, cut at 8 bandwidths
        for c in 0..d {
            let a = &axes[c];
            let lo = (((r[c] - 8.0 * h[c]) - a.start) / a.step).floor().max(0.0) as usize;
            let hi = ((((r[c] + 8.0 * h[c]) - a.start) / a.step).ceil().max(0.0) as usize).min(a.points - 1);
            support[c] = (lo, hi);
            for (i, k) in kernel[c].iter_mut().enumerate().take(hi.max(lo) + 1).skip(lo) {
                let z = (a.at(i) - r[c]) / h[c];
                *k = (-0.5 * z * z).exp();
            }
        }
        match d {
            1 => {
                let (lo, hi) = support[0];
                for i in lo..=hi {
                    values[i] += kernel[0][i];
                }
            }
            2 => {
                let n1 = axes[1].points;
                for i in support[0].0..=support[0].1 {
                    for j in support[1].0..=support[1].1 {
                        values[i * n1 + j] += kernel[0][i] * kernel[1][j];
                    }
                }
            }
            _ => {
                let (n1, n2) = (axes[1].points, axes[2].points);
                for i in support[0].0..=support[0].1 {
                    for j in support[1].0..=support[1].1 {
                        let kij = kernel[0][i] * kernel[1][j];
                        for k in support[2].0..=support[2].1 {
                            values[(i * n1 + j) * n2 + k] += kij * kernel[2][k];
                        }
                    }
                }
            }
        }
    }
    values.iter_mut().for_each(|v| *v /= norm);
    Ok(DensityEstimate { axes: axes.to_vec(), bandwidth: h.to_vec(), values })
}

pub fn kde(rows: &[Vec<f64>], rule: &Bandwidth) -> Result<DensityEstimate> {
    let h = bandwidths(rows, rule)?;
    let axes = common_grid(&[rows], &h)?;
    kde_on_grid(rows, &h, &axes)
}

pub fn l1_distance(a: &DensityEstimate, b: &DensityEstimate) -> Result<f64> {
    if a.axes != b.axes {
        return domain("L1 distance needs estimates on the same grid");
    }
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).sum::<f64>() * a.cell_volume())
}

/// L1 distance of KDEs of two samples on a shared grid with bandwidths `h`.
pub fn sample_l1_distance(a: &[Vec<f64>], b: &[Vec<f64>], h: &[f64]) -> Result<f64> {
    let axes = common_grid(&[a, b], h)?;
    l1_distance(&kde_on_grid(a, h, &axes)?, &kde_on_grid(b, h, &axes)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use crate::stats::normal_pdf;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_rows(m: usize, d: usize, s: u64) -> Vec<Vec<f64>> {
        let mut rng = seed::rng(s, &[42]);
        (0..m).map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()).collect()
    }

    fn l1_to_normal(est: &DensityEstimate) -> f64 {
        let a = est.axes[0];
        let inside: f64 = (0..a.points).map(|i| (est.values[i] - normal_pdf(a.at(i))).abs()).sum::<f64>() * a.step;
        // normal mass outside the grid
        let outside = crate::stats::normal_cdf(a.start) + 1.0 - crate::stats::normal_cdf(a.at(a.points - 1));
        inside + outside
    }

    #[test]
    fn recovers_standard_normal() {
        let rows = normal_rows(10_000, 1, 1);
        let est = kde(&rows, &Bandwidth::Silverman).unwrap();
        assert!(est.values.iter().all(|v| *v >= 0.0));
        assert!((est.mass() - 1.0).abs() < 1e-3, "mass {}", est.mass());
        assert!(l1_to_normal(&est) < 0.05, "{}", l1_to_normal(&est));
    }

    #[test]
    fn bandwidth_halving_is_stable() {
        let rows = normal_rows(10_000, 1, 2);
        let h = bandwidths(&rows, &Bandwidth::Silverman).unwrap();
        let axes = common_grid(&[&rows], &[h[0] / 2.0]).unwrap();
        let full = kde_on_grid(&rows, &h, &axes).unwrap();
        let half = kde_on_grid(&rows, &[h[0] / 2.0], &axes).unwrap();
        assert!(l1_distance(&full, &half).unwrap() < 0.1);
        assert!((l1_to_normal(&full) - l1_to_normal(&half)).abs() < 0.1);
    }

    #[test]
    fn higher_dimensions_normalize() {
        for d in 2..=3 {
            let rows = normal_rows(3000, d, 3);
            let est = kde(&rows, &Bandwidth::Silverman).unwrap();
            assert!((est.mass() - 1.0).abs() < 1e-3, "d={d} mass {}", est.mass());
        }
    }

    #[test]
    fn degenerate_coordinate_is_reported() {
        let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64, 1.0]).collect();
        assert!(matches!(kde(&rows, &Bandwidth::Silverman), Err(Error::Degenerate(_))));
        let rows: Vec<Vec<f64>> = (0..10).map(|_| vec![2.0]).collect();
        assert!(matches!(kde(&rows, &Bandwidth::Silverman), Err(Error::Degenerate(_))));
    }

    #[test]
    fn distance_properties() {
        let a = normal_rows(2000, 1, 4);
        let b: Vec<Vec<f64>> = a.iter().map(|r| vec![r[0] + 10.0]).collect();
        let h = [0.2];
        assert_eq!(sample_l1_distance(&a, &a, &h).unwrap(), 0.0);
        // disjoint supports
        assert!((sample_l1_distance(&a, &b, &h).unwrap() - 2.0).abs() < 1e-3);
        let est = kde(&a, &Bandwidth::Silverman).unwrap();
        let other = kde(&b, &Bandwidth::Silverman).unwrap();
        assert!(l1_distance(&est, &other).is_err());
    }
}
