//! Collocation grid for pseudospectral products.
//!
//! Spectral arrays are `ng x ng`, row `k1 mod ng`, column `k2 mod ng`, with
//! `u(x) = sum_k u^(k) exp(i k.x)`. Grid arrays come out transposed
//! (row `x2`, column `x1`); only pointwise products happen there, so the
//! orientation never matters. Two real fields travel through one complex
//! transform as `f + i g`.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Dealias;
use crate::torus::{SpectralVelocity, OSCILLATORY_AMPLITUDE};

/// `c (2 pi)^2` with `c` the oscillatory amplitude.
const PROJECT: f64 = 2.0 * SQRT_2 * PI;

/// Smallest `n >= min` whose prime factors are all at most 7.
pub fn smooth_size(min: usize) -> usize {
    (min.max(1)..)
        .find(|&n| {
            let mut m = n;
            for p in [2, 3, 5, 7] {
                while m % p == 0 {
                    m /= p;
                }
            }
            m == 1
        })
        .unwrap()
}

/// Grid size for truncation `n`: `3n + 1` makes quadratic products exact on
/// `|k|_inf <= n`; `2n + 2` only resolves the modes themselves.
pub fn grid_size(truncation: u32, dealias: Dealias) -> usize {
    let n = truncation as usize;
    match dealias {
        Dealias::TwoThirds => smooth_size(3 * n + 1),
        Dealias::None => smooth_size(2 * n + 2),
    }
}

/// Per-site data: `(j1, j2)`, `j_perp / |j|`, `|j|`, grid offsets of `+j` and `-j`.
#[derive(Debug, Clone)]
struct Site {
    j: (f64, f64),
    p: (f64, f64),
    norm: f64,
    plus: usize,
    minus: usize,
}

pub struct Workspace {
    truncation: u32,
    ng: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    active_rows: Vec<usize>,
    sites: Vec<Site>,
    spec: Vec<Complex64>,
    grid_a: Vec<Complex64>,
    grid_b: Vec<Complex64>,
    grid_c: Vec<Complex64>,
}

impl Workspace {
    pub fn new(truncation: u32, dealias: Dealias) -> Workspace {
        let ng = grid_size(truncation, dealias);
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(ng);
        let inv = planner.plan_fft_inverse(ng);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        let n = truncation as i32;
        let wrap = |k: i32| k.rem_euclid(ng as i32) as usize;
        let active_rows = (-n..=n).map(wrap).collect();
        let template = SpectralVelocity::zeros(truncation);
        let sites = (0..template.len() / 2)
            .map(|s| {
                let m = template.mode_at(2 * s);
                let norm = (m.norm_sq() as f64).sqrt();
                Site {
                    j: (m.j1 as f64, m.j2 as f64),
                    p: (-m.j2 as f64 / norm, m.j1 as f64 / norm),
                    norm,
                    plus: wrap(m.j1) * ng + wrap(m.j2),
                    minus: wrap(-m.j1) * ng + wrap(-m.j2),
                }
            })
            .collect();
        let zeros = vec![Complex64::new(0.0, 0.0); ng * ng];
        Workspace {
            truncation,
            ng,
            fwd,
            inv,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            active_rows,
            sites,
            spec: zeros.clone(),
            grid_a: zeros.clone(),
            grid_b: zeros.clone(),
            grid_c: zeros,
        }
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn grid_points(&self) -> usize {
        self.ng
    }

    /// Complex amplitude `z` with `u^(j) = z j_perp/|j|`: `c (b - i a) / 2`.
    fn amplitude(coeffs: &[f64], s: usize) -> Complex64 {
        Complex64::new(coeffs[2 * s + 1], -coeffs[2 * s]) * (0.5 * OSCILLATORY_AMPLITUDE)
    }

    /// Fills `self.spec` with `g(site, z)` at `+j` and its conjugate-symmetric
    /// partner at `-j`, then transforms into `out`.
    fn synthesize(&mut self, coeffs: &[f64], g: impl Fn(&Site, Complex64) -> (Complex64, Complex64), out: Grid) {
        self.spec.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for (s, site) in self.sites.iter().enumerate() {
            let z = Self::amplitude(coeffs, s);
            let (plus, minus) = g(site, z);
            self.spec[site.plus] = plus;
            self.spec[site.minus] = minus;
        }
        let ng = self.ng;
        for &r in &self.active_rows {
            self.inv.process_with_scratch(&mut self.spec[r * ng..(r + 1) * ng], &mut self.scratch);
        }
        let dst = match out {
            Grid::A => &mut self.grid_a,
            Grid::B => &mut self.grid_b,
            Grid::C => &mut self.grid_c,
        };
        transpose(&self.spec, dst, ng);
        self.inv.process_with_scratch(dst, &mut self.scratch);
    }

    /// `u1 + i u2`
    fn velocity_to(&mut self, coeffs: &[f64], out: Grid) {
        self.synthesize(
            coeffs,
            |s, z| {
                let d = Complex64::new(s.p.0, s.p.1);
                (z * d, z.conj() * d)
            },
            out,
        );
    }

    /// `d_m v1 + i d_m v2`
    fn derivative_to(&mut self, coeffs: &[f64], axis: usize, out: Grid) {
        self.synthesize(
            coeffs,
            |s, z| {
                let d = Complex64::new(s.p.0, s.p.1);
                let k = if axis == 0 { s.j.0 } else { s.j.1 };
                let i_k = Complex64::new(0.0, k);
                (i_k * z * d, -i_k * z.conj() * d)
            },
            out,
        );
    }

    /// Vorticity `d1 u2 - d2 u1` (real part).
    fn vorticity_to(&mut self, coeffs: &[f64], out: Grid) {
        self.synthesize(
            coeffs,
            |s, z| {
                let w = Complex64::new(0.0, s.norm) * z;
                (w, w.conj())
            },
            out,
        );
    }

    /// Forward transform of `w1 + i w2` held in grid A, followed by the
    /// Leray projection onto the real basis.
    fn project_from_a(&mut self, out: &mut [f64]) {
        let ng = self.ng;
        self.fwd.process_with_scratch(&mut self.grid_a, &mut self.scratch);
        transpose(&self.grid_a, &mut self.spec, ng);
        for &r in &self.active_rows {
            self.fwd.process_with_scratch(&mut self.spec[r * ng..(r + 1) * ng], &mut self.scratch);
        }
        let norm = 1.0 / (ng * ng) as f64;
        for (s, site) in self.sites.iter().enumerate() {
            let wp = self.spec[site.plus] * norm;
            let wm = self.spec[site.minus].conj() * norm;
            let w1 = (wp + wm) * 0.5;
            let w2 = (wp - wm) * Complex64::new(0.0, -0.5);
            let p = w1 * site.p.0 + w2 * site.p.1;
            out[2 * s] = -PROJECT * p.im;
            out[2 * s + 1] = PROJECT * p.re;
        }
    }

    /// Coefficients of `Pi (u . grad v)`.
    pub fn bilinear(&mut self, u: &[f64], v: &[f64], out: &mut [f64]) {
        self.velocity_to(u, Grid::B);
        self.derivative_to(v, 0, Grid::C);
        for (c, b) in self.grid_c.iter_mut().zip(&self.grid_b) {
            // u1 d1 v
            *c *= b.re;
        }
        self.derivative_to(v, 1, Grid::A);
        for ((a, b), c) in self.grid_a.iter_mut().zip(&self.grid_b).zip(&self.grid_c) {
            *a = *a * b.im + c;
        }
        self.project_from_a(out);
    }

    /// Coefficients of `Pi (u . grad u) = Pi (omega u_perp)` (the gradient
    /// part of the Lamb form is removed by the projection).
    pub fn self_advection(&mut self, u: &[f64], out: &mut [f64]) {
        self.velocity_to(u, Grid::B);
        self.vorticity_to(u, Grid::C);
        for ((a, b), c) in self.grid_a.iter_mut().zip(&self.grid_b).zip(&self.grid_c) {
            // omega (-u2, u1) as w1 + i w2
            *a = Complex64::new(-b.im, b.re) * c.re;
        }
        self.project_from_a(out);
    }
}

#[derive(Clone, Copy)]
enum Grid {
    A,
    B,
    C,
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const BLOCK: usize = 16;
    for rb in (0..n).step_by(BLOCK) {
        for cb in (0..n).step_by(BLOCK) {
            for r in rb..(rb + BLOCK).min(n) {
                for c in cb..(cb + BLOCK).min(n) {
                    dst[c * n + r] = src[r * n + c];
                }
            }
        }
    }
}
