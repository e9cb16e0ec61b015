//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use density_lab::fbm::HaarFunction;
use density_lab::quad::tanh_sinh;
use density_lab::seed;
use density_lab::torus::*;
use density_lab::wavelet::DyadicIndex;
use rand::Rng;

type C = (f64, f64);

fn cmul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

/// Complex vector Fourier coefficients of `u` on the box `|k|_inf <= 2n`,
/// straight from `sin t = (e^{it} - e^{-it}) / 2i`, `cos t = (e^{it} + e^{-it}) / 2`.
fn fourier(u: &SpectralVelocity, n: i32) -> Vec<[C; 2]> {
    let w = (4 * n + 1) as usize;
    let mut out = vec![[(0.0, 0.0); 2]; w * w];
    let at = |k1: i32, k2: i32| ((k1 + 2 * n) as usize) * w + (k2 + 2 * n) as usize;
    for (m, c) in u.modes() {
        let (d1, d2) = m.direction();
        let amp = OSCILLATORY_AMPLITUDE * c;
        // coefficient of e^{+ij.x} and e^{-ij.x}
        let (plus, minus) = match m.parity {
            Parity::Sin => ((0.0, -0.5 * amp), (0.0, 0.5 * amp)),
            Parity::Cos => ((0.5 * amp, 0.0), (0.5 * amp, 0.0)),
            _ => unreachable!(),
        };
        for (k, z) in [((m.j1, m.j2), plus), ((-m.j1, -m.j2), minus)] {
            let e = &mut out[at(k.0, k.1)];
            e[0].0 += z.0 * d1;
            e[0].1 += z.1 * d1;
            e[1].0 += z.0 * d2;
            e[1].1 += z.1 * d2;
        }
    }
    out
}

/// Galerkin projection of `u . grad v` by direct convolution over the lattice.
pub fn dense_bilinear(u: &SpectralVelocity, v: &SpectralVelocity) -> SpectralVelocity {
    let n = u.truncation() as i32;
    let w = (4 * n + 1) as usize;
    let at = |k1: i32, k2: i32| ((k1 + 2 * n) as usize) * w + (k2 + 2 * n) as usize;
    let uh = fourier(u, n);
    let vh = fourier(v, n);
    let mut prod = vec![[(0.0, 0.0); 2]; w * w];
    for p1 in -n..=n {
        for p2 in -n..=n {
            let up = uh[at(p1, p2)];
            for q1 in -n..=n {
                for q2 in -n..=n {
                    let vq = vh[at(q1, q2)];
                    // u(p) . (i q)
                    let s = (-(up[0].1 * q1 as f64 + up[1].1 * q2 as f64), up[0].0 * q1 as f64 + up[1].0 * q2 as f64);
                    let e = &mut prod[at(p1 + q1, p2 + q2)];
                    for c in 0..2 {
                        let t = cmul(s, vq[c]);
                        e[c].0 += t.0;
                        e[c].1 += t.1;
                    }
                }
            }
        }
    }
    let mut out = SpectralVelocity::zeros(u.truncation());
    for i in 0..out.len() {
        let m = out.mode_at(i);
        let e = fourier(&SpectralVelocity::from_modes(u.truncation(), &[(m, 1.0)]).unwrap(), n);
        // <w, e> = (2 pi)^2 sum_k w(k) . conj(e(k))
        let mut acc = 0.0;
        for k in 0..w * w {
            for c in 0..2 {
                acc += prod[k][c].0 * e[k][c].0 + prod[k][c].1 * e[k][c].1;
            }
        }
        out.coeffs_mut()[i] = 4.0 * PI * PI * acc;
    }
    out
}

pub fn random_field(n: u32, modes: usize, seed: u64) -> SpectralVelocity {
    let mut rng = seed::rng(seed, &[99]);
    let mut u = SpectralVelocity::zeros(n);
    for _ in 0..modes {
        let i = rng.random_range(0..u.len());
        u.coeffs_mut()[i] = rng.random_range(-1.0..1.0);
    }
    u
}

/// Pieces `(start, weight)` of common length, times an overall scale.
fn pieces(f: HaarFunction) -> (Vec<(f64, f64)>, f64, f64) {
    match f {
        HaarFunction::Coarse => (vec![(0.0, 1.0)], 1.0, 1.0),
        HaarFunction::Detail(DyadicIndex { level, shift }) => {
            let w = 0.5f64.powi(level as i32);
            (vec![(shift as f64 * w, 1.0), ((shift as f64 + 0.5) * w, -1.0)], 0.5 * w, 2f64.powf(0.5 * level as f64))
        }
    }
}

/// Quadrature of `H(2H-1) int int f(s) g(t) |t-s|^{2H-2}` in the difference
/// variable `u = t - s`: for indicators of `A` and `B` the inner integral is
/// the overlap length `|A cap (B - u)|`, piecewise linear in `u`, so a single
/// tanh-sinh pass split at the kinks and at the singular point `u = 0` does.
pub fn fbm_covariance_quadrature(h: f64, f: HaarFunction, g: HaarFunction) -> f64 {
    let (pf, lf, cf) = pieces(f);
    let (pg, lg, cg) = pieces(g);
    let overlap = |a: f64, b: f64, u: f64| ((a + lf).min(b + lg - u) - a.max(b - u)).max(0.0);
    let mut breaks = vec![0.0];
    for &(a, _) in &pf {
        for &(b, _) in &pg {
            breaks.extend([b - a - lf, b - a, b + lg - a - lf, b + lg - a]);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let weight = |u: f64| -> f64 {
        let mut acc = 0.0;
        for &(a, sa) in &pf {
            for &(b, sb) in &pg {
                acc += sa * sb * overlap(a, b, u);
            }
        }
        acc
    };
    let c = h * (2.0 * h - 1.0);
    let p = 2.0 * h - 2.0;
    let total: f64 = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            // distance to the singular point, exact when it is an endpoint
            let dist = move |u: f64, dl: f64, dr: f64| {
                if lo == 0.0 {
                    dl
                } else if hi == 0.0 {
                    dr
                } else {
                    u.abs()
                }
            };
            tanh_sinh(|u, dl, dr| weight(u) * c * dist(u, dl, dr).powf(p), lo, hi, 1e-14)
        })
        .sum();
    cf * cg * total
}
