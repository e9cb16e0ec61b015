//! Exact covariances of Haar coefficients of fractional Gaussian noise.
//!
//! For step functions `f = sum_i a_i 1{x >= s_i}` and `g = sum_l b_l 1{x >= t_l}`
//! with compact support, the kernel `H(2H-1)|t-s|^{2H-2}` gives
//! `Cov = -1/2 sum_{i,l} a_i b_l |t_l - s_i|^{2H}`. Evaluated naively this loses
//! about four digits per decade of separation, so far-apart pairs go through
//! a binomial expansion whose low moments are exact dyadic arithmetic.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::FbmSpec;
use crate::error::{Error, Result};
use crate::wavelet::DyadicIndex;

/// A Haar-family basis function on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HaarFunction {
    /// `phi_{0,0} = 1_[0,1]`
    Coarse,
    Detail(DyadicIndex),
}

/// Jump representation: `scale * sum w_i 1{x >= x_i}` with small integer weights.
struct Steps {
    scale: f64,
    center: f64,
    half_width: f64,
    points: [(f64, f64); 3],
    len: usize,
}

impl Steps {
    fn of(f: HaarFunction) -> Steps {
        match f {
            HaarFunction::Coarse => Steps {
                scale: 1.0,
                center: 0.5,
                half_width: 0.5,
                points: [(0.0, 1.0), (1.0, -1.0), (0.0, 0.0)],
                len: 2,
            },
            HaarFunction::Detail(DyadicIndex { level, shift }) => {
                let w = (-(level as f64)).exp2();
                let a = shift as f64 * w;
                Steps {
                    scale: (0.5 * level as f64).exp2(),
                    center: a + 0.5 * w,
                    half_width: 0.5 * w,
                    points: [(a, 1.0), (a + 0.5 * w, -2.0), (a + w, 1.0)],
                    len: 3,
                }
            }
        }
    }

    fn points(&self) -> &[(f64, f64)] {
        &self.points[..self.len]
    }

    /// `sum w_i (x_i - center)^r` for `r < n`. Exact for small `r` since the
    /// offsets are dyadic with few significant bits.
    fn moments(&self, n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n];
        for &(x, w) in self.points() {
            let u = x - self.center;
            let mut pow = 1.0;
            for mr in m.iter_mut() {
                *mr += w * pow;
                pow *= u;
            }
        }
        m
    }
}

/// Separation ratio below which the expansions are used.
const SERIES_RATIO: f64 = 1.0 / 3.0;
const MAX_TERMS: usize = 200;

fn binomials(a: f64, n: usize) -> Vec<f64> {
    let mut c = vec![1.0; n];
    for m in 1..n {
        c[m] = c[m - 1] * (a - (m - 1) as f64) / m as f64;
    }
    c
}

/// `sum_m c_m y^m mu_m` truncated once terms stop contributing.
fn series(coef: &[f64], moments: &[f64], inv_x: f64) -> f64 {
    let mut total = 0.0;
    let mut pow = 1.0;
    let mut quiet = 0;
    for (c, mu) in coef.iter().zip(moments) {
        let term = c * mu * pow;
        total += term;
        pow *= inv_x;
        if term.abs() <= 1e-18 * total.abs() {
            quiet += 1;
            if quiet >= 4 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    total
}

/// `sum_{i,l} a_i b_l |t_l - s_i|^{2H}`
fn step_sum(h2: f64, f: &Steps, g: &Steps) -> f64 {
    let coef = binomials(h2, MAX_TERMS);
    let x0 = g.center - f.center;
    let spread = f.half_width + g.half_width;
    if spread <= SERIES_RATIO * x0.abs() {
        // |x0 + v - u|^2H = |x0|^2H sum_m C(2H,m) ((v-u)/x0)^m
        let mu = f.moments(MAX_TERMS);
        let nu = g.moments(MAX_TERMS);
        let mut total = 0.0;
        let mut pow = 1.0;
        let inv = 1.0 / x0;
        let mut quiet = 0;
        for m in 0..MAX_TERMS {
            let mut cm = 0.0;
            let mut b = 1.0;
            for r in 0..=m {
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                cm += b * sign * mu[r] * nu[m - r];
                b = b * (m - r) as f64 / (r + 1) as f64;
            }
            let term = coef[m] * cm * pow;
            total += term;
            pow *= inv;
            if m > 4 && term.abs() <= 1e-18 * total.abs() {
                quiet += 1;
                if quiet >= 4 {
                    break;
                }
            } else if m > 4 {
                quiet = 0;
            }
        }
        return x0.abs().powf(h2) * total;
    }
    // expand in the narrower function around each jump of the wider one
    let (wide, narrow) = if f.half_width >= g.half_width { (f, g) } else { (g, f) };
    let nu = narrow.moments(MAX_TERMS);
    wide.points()
        .iter()
        .map(|&(s, a)| {
            let x = narrow.center - s;
            let inner = if narrow.half_width <= SERIES_RATIO * x.abs() {
                x.abs().powf(h2) * series(&coef, &nu, 1.0 / x)
            } else {
                narrow.points().iter().map(|&(t, b)| b * (t - s).abs().powf(h2)).sum()
            };
            a * inner
        })
        .sum()
}

/// `E[xi(f) xi(g)]` for Haar-family `f`, `g`, with kernel constant `H(2H-1)`.
pub fn covariance_between(spec: &FbmSpec, f: HaarFunction, g: HaarFunction) -> Result<f64> {
    for x in [f, g] {
        if let HaarFunction::Detail(i) = x {
            i.validate()?;
        }
    }
    Ok(covariance_unchecked(spec.hurst, f, g))
}

fn order_key(f: HaarFunction) -> (i64, i64) {
    match f {
        HaarFunction::Coarse => (-1, 0),
        HaarFunction::Detail(i) => (i.level as i64, i.shift),
    }
}

pub(crate) fn covariance_unchecked(hurst: f64, f: HaarFunction, g: HaarFunction) -> f64 {
    // one summation order for (f, g) and (g, f), so symmetry holds bit for bit
    let (f, g) = if order_key(f) <= order_key(g) { (f, g) } else { (g, f) };
    let (sf, sg) = (Steps::of(f), Steps::of(g));
    -0.5 * sf.scale * sg.scale * step_sum(2.0 * hurst, &sf, &sg)
}

/// `E[zeta_{j,k} zeta_{j,l}]` for orthonormal Haar details.
pub fn covariance_entry(spec: &FbmSpec, level: u32, k: i64, l: i64) -> Result<f64> {
    covariance_between(
        spec,
        HaarFunction::Detail(DyadicIndex::new(level, k)),
        HaarFunction::Detail(DyadicIndex::new(level, l)),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelCovariance {
    pub level: u32,
    pub hurst: f64,
    pub matrix: DMatrix<f64>,
}

impl LevelCovariance {
    pub fn diagonal_mean(&self) -> f64 {
        self.matrix.diagonal().mean()
    }

    /// Dense row-major CSV with a `# j=..,H=..` header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# j={},H={}", self.level, self.hurst)?;
        for r in 0..self.matrix.nrows() {
            let row: Vec<String> = self.matrix.row(r).iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Relative tolerance for the positive-semidefiniteness check.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Errors with [`Error::NotPsd`] unless `m + tol * trace * I` admits a
/// Cholesky factor. Returns the factor of the unshifted matrix when it
/// exists, else of the shifted one.
pub(crate) fn psd_factor(m: &DMatrix<f64>, what: &str) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if let Some(c) = m.clone().cholesky() {
        return Ok(c);
    }
    let shift = PSD_TOLERANCE * m.trace().abs().max(f64::MIN_POSITIVE);
    let shifted = m + DMatrix::identity(m.nrows(), m.ncols()) * shift;
    shifted
        .cholesky()
        .ok_or_else(|| Error::NotPsd(format!("{what}: negative eigenvalue beyond {PSD_TOLERANCE:e} x trace")))
}

/// Full symmetric covariance of level `j`; errors if it is not PSD.
pub fn build_level_covariance(spec: &FbmSpec, level: u32) -> Result<LevelCovariance> {
    if level > spec.max_level {
        return crate::error::domain(format!("level {level} exceeds max level {}", spec.max_level));
    }
    let n = 1usize << level;
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in k..n {
            let v = covariance_unchecked(
                spec.hurst,
                HaarFunction::Detail(DyadicIndex::new(level, k as i64)),
                HaarFunction::Detail(DyadicIndex::new(level, l as i64)),
            );
            m[(k, l)] = v;
            m[(l, k)] = v;
        }
    }
    psd_factor(&m, &format!("level {level} covariance"))?;
    Ok(LevelCovariance { level, hurst: spec.hurst, matrix: m })
}

/// Basis functions in [`crate::wavelet::CoefficientField::to_vec`] order.
pub fn joint_layout(max_level: u32) -> Vec<HaarFunction> {
    let mut v = vec![HaarFunction::Coarse];
    for j in 0..=max_level {
        v.extend((0..1i64 << j).map(|k| HaarFunction::Detail(DyadicIndex::new(j, k))));
    }
    v
}

/// Covariance of all coefficients up to `max_level`, cross-level blocks included.
pub fn joint_covariance(spec: &FbmSpec) -> DMatrix<f64> {
    let layout = joint_layout(spec.max_level);
    let n = layout.len();
    let mut m = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let v = covariance_unchecked(spec.hurst, layout[a], layout[b]);
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    m
}
