//! Multiresolution analysis on `[0, 1]`.
//!
//! Conventions: `psi_{j,k}(t) = 2^{j/2} psi(2^j t - k)` and likewise for
//! `phi`, with `k` in `0..2^j` (the shifts `J_j`). This system is orthonormal in
//! `L^2(0, 1)`. Haar needs no boundary treatment; Daubechies families of order
//! two and higher are periodized, so every level has exactly `2^j` shifts.

mod cascade;
pub mod field;
pub mod filters;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

pub use cascade::{Cascade, DEFAULT_LEVELS};
pub use field::{BesovParams, CoefficientField};
pub use filters::{check_orthogonality, OrthogonalityReport};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", content = "order", rename_all = "snake_case")]
pub enum WaveletKind {
    Haar,
    Daubechies(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Wavelet,
    Scaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicIndex {
    pub level: u32,
    pub shift: i64,
}

impl DyadicIndex {
    pub fn new(level: u32, shift: i64) -> DyadicIndex {
        DyadicIndex { level, shift }
    }

    pub fn is_valid(&self) -> bool {
        self.level < 62 && self.shift >= 0 && self.shift < (1i64 << self.level)
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidIndex { level: self.level, shift: self.shift })
        }
    }
}

/// Number of shifts at level `j`.
pub fn shifts(level: u32) -> usize {
    1usize << level
}

#[derive(Debug, Clone)]
pub struct WaveletFamily {
    kind: WaveletKind,
    filter: Vec<f64>,
    cascade: Option<Arc<Cascade>>,
}

fn cascade_cache() -> &'static Mutex<HashMap<u32, Arc<Cascade>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Cascade>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl WaveletFamily {
    pub fn haar() -> WaveletFamily {
        WaveletFamily { kind: WaveletKind::Haar, filter: filters::daubechies(1).unwrap(), cascade: None }
    }

    /// Daubechies family of the given order (1 is Haar). Cascade tables are
    /// built once per order and shared.
    pub fn daubechies(order: u32) -> Result<WaveletFamily> {
        if order == 1 {
            return Ok(WaveletFamily::haar());
        }
        let Some(filter) = filters::daubechies(order) else {
            return domain(format!("Daubechies order {order} not available (1..=6)"));
        };
        let cascade = {
            let mut cache = cascade_cache().lock().unwrap();
            cache
                .entry(order)
                .or_insert_with(|| Arc::new(Cascade::new(&filter, DEFAULT_LEVELS)))
                .clone()
        };
        Ok(WaveletFamily { kind: WaveletKind::Daubechies(order), filter, cascade: Some(cascade) })
    }

    pub fn from_kind(kind: WaveletKind) -> Result<WaveletFamily> {
        match kind {
            WaveletKind::Haar => Ok(WaveletFamily::haar()),
            WaveletKind::Daubechies(order) => WaveletFamily::daubechies(order),
        }
    }

    /// Family with an arbitrary filter, used to exercise the orthogonality check.
    pub fn with_filter(kind: WaveletKind, filter: Vec<f64>) -> WaveletFamily {
        WaveletFamily { kind, filter, cascade: None }
    }

    pub fn kind(&self) -> WaveletKind {
        self.kind
    }

    pub fn filter(&self) -> &[f64] {
        &self.filter
    }

    pub fn order(&self) -> u32 {
        match self.kind {
            WaveletKind::Haar => 1,
            WaveletKind::Daubechies(o) => o,
        }
    }

    /// Width of the support of the mother functions: 1 for Haar, `2u - 1` for order `u`.
    pub fn support_width(&self) -> usize {
        2 * self.order() as usize - 1
    }

    pub fn is_haar(&self) -> bool {
        self.kind == WaveletKind::Haar || self.order() == 1
    }

    pub fn verify_filter_orthogonality(&self) -> OrthogonalityReport {
        check_orthogonality(&self.filter)
    }

    fn mother(&self, kind: BasisKind, x: f64) -> f64 {
        match &self.cascade {
            Some(c) => match kind {
                BasisKind::Wavelet => c.psi(x),
                BasisKind::Scaling => c.phi(x),
            },
            None => haar_mother(kind, x),
        }
    }

    /// Value of `psi_{j,k}` (or `phi_{j,k}`) at `t`.
    pub fn evaluate(&self, index: DyadicIndex, kind: BasisKind, t: f64) -> Result<f64> {
        index.validate()?;
        if !(0.0..=1.0).contains(&t) {
            return domain(format!("t = {t} outside [0, 1]"));
        }
        Ok(self.evaluate_unchecked(index, kind, t))
    }

    pub(crate) fn evaluate_unchecked(&self, index: DyadicIndex, kind: BasisKind, t: f64) -> f64 {
        let scale = (1u64 << index.level) as f64;
        let amp = scale.sqrt();
        if self.is_haar() {
            // closed on the right at t = 1 so that psi_{0,0}(1) = -1
            let x = scale * t - index.shift as f64;
            let x = if t == 1.0 && index.shift == (1i64 << index.level) - 1 { x - 1e-12 } else { x };
            return amp * haar_mother(kind, x);
        }
        let width = self.support_width() as f64;
        let period = scale;
        let x0 = scale * t - index.shift as f64;
        // bring x0 to the smallest equivalent value >= 0
        let mut x = x0 - (x0 / period).floor() * period;
        let mut acc = 0.0;
        while x <= width {
            acc += self.mother(kind, x);
            x += period;
        }
        amp * acc
    }

    /// Calls `f(k, value)` for every shift at `level` whose function is
    /// nonzero at `t`.
    pub fn for_each_active(&self, level: u32, kind: BasisKind, t: f64, mut f: impl FnMut(usize, f64)) {
        let n = shifts(level);
        let scale = n as f64;
        if self.is_haar() {
            let k = ((scale * t).floor() as usize).min(n - 1);
            f(k, self.evaluate_unchecked(DyadicIndex::new(level, k as i64), kind, t));
            return;
        }
        let width = self.support_width();
        if n <= width + 1 {
            for k in 0..n {
                f(k, self.evaluate_unchecked(DyadicIndex::new(level, k as i64), kind, t));
            }
            return;
        }
        let top = (scale * t).floor() as i64;
        for d in 0..=width as i64 {
            let k = (top - d).rem_euclid(n as i64);
            f(k as usize, self.evaluate_unchecked(DyadicIndex::new(level, k), kind, t));
        }
    }
}

fn haar_mother(kind: BasisKind, x: f64) -> f64 {
    if !(0.0..1.0).contains(&x) {
        return 0.0;
    }
    match kind {
        BasisKind::Scaling => 1.0,
        BasisKind::Wavelet => {
            if x < 0.5 {
                1.0
            } else {
                -1.0
            }
        }
    }
}
