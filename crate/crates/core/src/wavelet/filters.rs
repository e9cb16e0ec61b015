//! Orthonormal scaling filters, normalized so that `sum p_k = sqrt(2)` and
//! `sum_k p_k p_{k+2l} = delta_{l,0}`.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

type Complex64 = Complex<f64>;

/// Daubechies scaling filter of order `1..=MAX_ORDER` (1 is Haar), extremal
/// phase, obtained by spectral factorization of the Daubechies polynomial
/// `P(y) = sum_{k<N} C(N-1+k, k) y^k`: each root `y_i` maps to the zero of
/// `z^2 - 2(1 - 2y_i) z + 1` inside the unit circle.
pub fn daubechies(order: u32) -> Option<Vec<f64>> {
    let s2 = std::f64::consts::SQRT_2;
    match order {
        1 => Some(vec![1.0 / s2, 1.0 / s2]),
        2 => {
            let r3 = 3f64.sqrt();
            let d = 4.0 * s2;
            Some(vec![(1.0 + r3) / d, (3.0 + r3) / d, (3.0 - r3) / d, (1.0 - r3) / d])
        }
        3..=MAX_ORDER => Some(spectral_factor(order as usize)),
        _ => None,
    }
}

pub const MAX_ORDER: u32 = 6;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn spectral_factor(n: usize) -> Vec<f64> {
    // P(y), ascending coefficients
    let coeffs: Vec<f64> = (0..n).map(|k| binomial(n - 1 + k, k)).collect();
    let roots = polynomial_roots(&coeffs);
    let one = Complex64::new(1.0, 0.0);
    // H(z) = ((1 + z)/2)^n prod (z - z_i)/(1 - z_i), ascending powers of z
    let mut poly = vec![one];
    for _ in 0..n {
        poly = multiply(&poly, &[Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)]);
    }
    for y in roots {
        let b = one - 2.0 * y;
        let disc = (b * b - one).sqrt();
        let (z1, z2) = (b + disc, b - disc);
        let z = if z1.norm() < z2.norm() { z1 } else { z2 };
        let scale = one / (one - z);
        poly = multiply(&poly, &[-z * scale, scale]);
    }
    // ascending powers come out back-loaded; published filters are front-loaded
    poly.iter().rev().map(|c| std::f64::consts::SQRT_2 * c.re).collect()
}

fn multiply(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Roots of a real polynomial given by ascending coefficients: companion
/// matrix eigenvalues followed by Newton polishing.
fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let mut companion = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        companion[(i, deg - 1)] = -coeffs[i] / lead;
    }
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    companion
        .complex_eigenvalues()
        .iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..20 {
                let (p, dp) = eval(z);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                z -= step;
                if step.norm() < 1e-17 * z.norm().max(1.0) {
                    break;
                }
            }
            z
        })
        .collect()
}

/// Quadrature mirror filter `g_k = (-1)^k p_{L-1-k}`.
pub fn wavelet_filter(scaling: &[f64]) -> Vec<f64> {
    let l = scaling.len();
    (0..l)
        .map(|k| if k % 2 == 0 { scaling[l - 1 - k] } else { -scaling[l - 1 - k] })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagDeviation {
    pub lag: i64,
    pub value: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    pub max_deviation: f64,
    pub lags: Vec<LagDeviation>,
    pub flagged: bool,
}

/// Deviations above this are flagged as a broken filter.
pub const ORTHOGONALITY_FLAG: f64 = 1e-10;

/// Checks `sum_k p_k p_{k+2l} = delta_{l,0}` over every lag with overlap.
pub fn check_orthogonality(filter: &[f64]) -> OrthogonalityReport {
    let n = filter.len() as i64;
    let max_lag = (n - 1) / 2;
    let mut lags = Vec::new();
    let mut max_deviation: f64 = 0.0;
    for lag in 0..=max_lag {
        let value: f64 = (0..n)
            .filter_map(|k| {
                let m = k + 2 * lag;
                (m < n).then(|| filter[k as usize] * filter[m as usize])
            })
            .sum();
        let target = if lag == 0 { 1.0 } else { 0.0 };
        max_deviation = max_deviation.max((value - target).abs());
        lags.push(LagDeviation { lag, value, target });
    }
    OrthogonalityReport { max_deviation, lags, flagged: max_deviation > ORTHOGONALITY_FLAG }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct double loop over all index pairs, independent of the lag loop above.
    fn brute_force_deviation(p: &[f64]) -> f64 {
        let n = p.len() as i64;
        let mut dev: f64 = 0.0;
        for l in -n..=n {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if j == i + 2 * l {
                        s += p[i as usize] * p[j as usize];
                    }
                }
            }
            let t = if l == 0 { 1.0 } else { 0.0 };
            dev = dev.max((s - t).abs());
        }
        dev
    }

    /// Published extremal-phase filters (10-digit truncations).
    const PUBLISHED: [&[f64]; 4] = [
        &[0.3326705530, 0.8068915093, 0.4598775021, -0.1350110200, -0.0854412739, 0.0352262919],
        &[0.2303778133, 0.7148465706, 0.6308807679, -0.0279837694, -0.1870348117, 0.0308413818, 0.0328830117, -0.0105974018],
        &[0.1601023980, 0.6038292698, 0.7243085284, 0.1384281459, -0.2422948871, -0.0322448696, 0.0775714938, -0.0062414902, -0.0125807520, 0.0033357253],
        &[0.1115407434, 0.4946238904, 0.7511339080, 0.3152503517, -0.2262646940, -0.1297668676, 0.0975016056, 0.0275228655, -0.0315820393, 0.0005538422, 0.0047772575, -0.0010773011],
    ];

    #[test]
    fn factorization_reproduces_published_filters() {
        for (i, table) in PUBLISHED.iter().enumerate() {
            let p = daubechies(i as u32 + 3).unwrap();
            for (a, b) in p.iter().zip(table.iter()) {
                assert!((a - b).abs() < 1e-9, "order {}: {a} vs {b}", i + 3);
            }
        }
    }

    #[test]
    fn haar_is_exactly_orthogonal() {
        let r = check_orthogonality(&daubechies(1).unwrap());
        assert!(r.max_deviation < 1e-15);
        assert!(!r.flagged);
    }

    #[test]
    fn daubechies_filters_are_orthogonal() {
        for order in 1..=6 {
            let p = daubechies(order).unwrap();
            assert_eq!(p.len(), 2 * order as usize);
            let r = check_orthogonality(&p);
            assert!(r.max_deviation < 1e-12, "order {order}: {}", r.max_deviation);
            assert!(brute_force_deviation(&p) < 1e-12);
            let sum: f64 = p.iter().sum();
            assert!((sum - std::f64::consts::SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn corrupted_filter_is_flagged() {
        let mut p = daubechies(2).unwrap();
        p[1] += 0.1;
        let r = check_orthogonality(&p);
        assert!(r.max_deviation >= 0.01);
        assert!(r.flagged);
        assert!((brute_force_deviation(&p) - r.max_deviation).abs() < 1e-15);
    }

    #[test]
    fn wavelet_filter_has_vanishing_sum() {
        for order in 1..=MAX_ORDER {
            let g = wavelet_filter(&daubechies(order).unwrap());
            assert!(g.iter().sum::<f64>().abs() < 1e-12, "order {order}");
        }
    }
}
