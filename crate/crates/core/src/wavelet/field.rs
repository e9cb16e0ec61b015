//! Wavelet coefficient fields, Besov sequence norms and dyadic projections.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{shifts, WaveletKind};
use crate::error::{domain, Error, Result};

/// Coefficients `lambda_{j,k}` for `0 <= j <= max_level` plus the coarse
/// coefficient `a_0` of `phi_{0,0}`. Stored level-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientField {
    max_level: u32,
    coarse: f64,
    detail: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64) -> Result<BesovParams> {
        if !(p >= 1.0 && p.is_finite()) {
            return domain(format!("Besov integrability p = {p} must lie in [1, inf)"));
        }
        if !s.is_finite() {
            return domain("Besov smoothness must be finite");
        }
        Ok(BesovParams { s, p })
    }

    /// Weight of `sum_k |lambda_{j,k}|^p` at level `j`:
    /// `2^{j(s - 1/p)p} 2^{jp/2} = 2^{j(s + 1/2 - 1/p)p}`.
    pub fn level_weight(&self, level: u32) -> f64 {
        let j = level as f64;
        (j * (self.s - 1.0 / self.p) * self.p + j * self.p / 2.0).exp2()
    }
}

impl CoefficientField {
    pub fn zeros(max_level: u32) -> CoefficientField {
        CoefficientField {
            max_level,
            coarse: 0.0,
            detail: (0..=max_level).map(|j| vec![0.0; shifts(j)]).collect(),
        }
    }

    pub fn from_parts(coarse: f64, detail: Vec<Vec<f64>>) -> Result<CoefficientField> {
        if detail.is_empty() {
            return domain("coefficient field needs at least level 0");
        }
        for (j, level) in detail.iter().enumerate() {
            if level.len() != shifts(j as u32) {
                return Err(Error::InvalidIndex { level: j as u32, shift: level.len() as i64 });
            }
        }
        Ok(CoefficientField { max_level: detail.len() as u32 - 1, coarse, detail })
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn coarse(&self) -> f64 {
        self.coarse
    }

    pub fn set_coarse(&mut self, v: f64) {
        self.coarse = v;
    }

    pub fn level(&self, j: u32) -> &[f64] {
        &self.detail[j as usize]
    }

    pub fn level_mut(&mut self, j: u32) -> &mut [f64] {
        &mut self.detail[j as usize]
    }

    pub fn get(&self, j: u32, k: usize) -> f64 {
        self.detail.get(j as usize).and_then(|l| l.get(k)).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, j: u32, k: usize, v: f64) -> Result<()> {
        let slot = self
            .detail
            .get_mut(j as usize)
            .and_then(|l| l.get_mut(k))
            .ok_or(Error::InvalidIndex { level: j, shift: k as i64 })?;
        *slot = v;
        Ok(())
    }

    /// Flat view `[a_0, level 0, level 1, ...]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 << (self.max_level + 1));
        v.push(self.coarse);
        for l in &self.detail {
            v.extend_from_slice(l);
        }
        v
    }

    pub fn from_vec(max_level: u32, v: &[f64]) -> Result<CoefficientField> {
        let expected = 1usize << (max_level + 1);
        if v.len() != expected {
            return domain(format!("expected {expected} coefficients, got {}", v.len()));
        }
        let mut f = CoefficientField::zeros(max_level);
        f.coarse = v[0];
        let mut off = 1;
        for l in f.detail.iter_mut() {
            let n = l.len();
            l.copy_from_slice(&v[off..off + n]);
            off += n;
        }
        Ok(f)
    }

    fn zip_with(&self, other: &CoefficientField, op: impl Fn(f64, f64) -> f64) -> CoefficientField {
        // absent levels count as zero
        let max_level = self.max_level.max(other.max_level);
        let mut out = CoefficientField::zeros(max_level);
        out.coarse = op(self.coarse, other.coarse);
        for j in 0..=max_level {
            for (k, v) in out.detail[j as usize].iter_mut().enumerate() {
                *v = op(self.get(j, k), other.get(j, k));
            }
        }
        out
    }

    pub fn add(&self, other: &CoefficientField) -> CoefficientField {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CoefficientField) -> CoefficientField {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> CoefficientField {
        let mut out = self.clone();
        out.coarse *= c;
        out.detail.iter_mut().flatten().for_each(|v| *v *= c);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coarse == 0.0 && self.detail.iter().flatten().all(|v| *v == 0.0)
    }

    /// `sum_k |lambda_{j,k}|^p` at one level.
    pub fn level_p_sum(&self, j: u32, p: f64) -> f64 {
        self.level(j).iter().map(|v| v.abs().powf(p)).sum()
    }

    /// `sum_j 2^{j(s + 1/2 - 1/p)p} sum_k |lambda_{j,k}|^p + |a_0|^p`,
    /// i.e. the p-th power of [`besov_seminorm`](Self::besov_seminorm).
    pub fn besov_power(&self, params: BesovParams) -> f64 {
        let details: f64 = (0..=self.max_level)
            .map(|j| params.level_weight(j) * self.level_p_sum(j, params.p))
            .sum();
        details + self.coarse.abs().powf(params.p)
    }

    pub fn besov_seminorm(&self, params: BesovParams) -> f64 {
        self.besov_power(params).powf(1.0 / params.p)
    }

    /// Projection onto `G_n = F_0 + ... + F_n`: keeps `a_0` and levels `j <= n`.
    pub fn project_gn(&self, n: u32) -> Result<CoefficientField> {
        if n > self.max_level {
            return domain(format!("projection level {n} exceeds max level {}", self.max_level));
        }
        let mut out = self.clone();
        for j in (n + 1)..=self.max_level {
            out.detail[j as usize].iter_mut().for_each(|v| *v = 0.0);
        }
        Ok(out)
    }

    /// Complement of [`project_gn`](Self::project_gn): keeps only levels `j > n`.
    pub fn project_complement(&self, n: u32) -> Result<CoefficientField> {
        if n > self.max_level {
            return domain(format!("projection level {n} exceeds max level {}", self.max_level));
        }
        let mut out = self.clone();
        out.coarse = 0.0;
        for j in 0..=n {
            out.detail[j as usize].iter_mut().for_each(|v| *v = 0.0);
        }
        Ok(out)
    }

    /// Writes the NDJSON form: one header line, then one `{j, k, value}` per
    /// detail coefficient in level-major order.
    pub fn write_ndjson<W: Write>(&self, kind: WaveletKind, mut w: W) -> Result<()> {
        let (family, order) = match kind {
            WaveletKind::Haar => ("haar", 1),
            WaveletKind::Daubechies(o) => ("daubechies", o),
        };
        let header = FieldHeader {
            family: family.to_string(),
            order,
            max_level: self.max_level,
            normalization: NORMALIZATION.to_string(),
            coarse: self.coarse,
        };
        serde_json::to_writer(&mut w, &header)?;
        writeln!(w)?;
        for (j, level) in self.detail.iter().enumerate() {
            for (k, value) in level.iter().enumerate() {
                serde_json::to_writer(&mut w, &FieldRecord { j: j as u32, k: k as u64, value: *value })?;
                writeln!(w)?;
            }
        }
        Ok(())
    }

    pub fn read_ndjson<R: BufRead>(r: R) -> Result<(WaveletKind, CoefficientField)> {
        let mut lines = r.lines();
        let first = lines.next().ok_or_else(|| Error::Domain("empty coefficient file".into()))??;
        let header: FieldHeader = serde_json::from_str(&first)?;
        if header.normalization != NORMALIZATION {
            return domain(format!("unsupported normalization {}", header.normalization));
        }
        let kind = match header.family.as_str() {
            "haar" => WaveletKind::Haar,
            "daubechies" => WaveletKind::Daubechies(header.order),
            other => return domain(format!("unknown family {other}")),
        };
        let mut field = CoefficientField::zeros(header.max_level);
        field.coarse = header.coarse;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: FieldRecord = serde_json::from_str(&line)?;
            field.set(rec.j, rec.k as usize, rec.value)?;
        }
        Ok((kind, field))
    }
}

pub const NORMALIZATION: &str = "L2-orthonormal";

#[derive(Debug, Serialize, Deserialize)]
struct FieldHeader {
    family: String,
    order: u32,
    max_level: u32,
    normalization: String,
    coarse: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldRecord {
    j: u32,
    k: u64,
    value: f64,
}
