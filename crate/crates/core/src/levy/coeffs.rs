//! Wavelet coefficients of compound-Poisson Lévy noise:
//! `zeta_{j,k} = sum_n psi_{j,k}(tau_n) Y_n`.

use super::measure::{sample_large_jumps, JumpSample, LevyMeasureSpec};
use crate::error::Result;
use crate::wavelet::{BasisKind, CoefficientField, DyadicIndex, WaveletFamily};

/// `sum_n f(tau_n) Y_n` for `f = psi_{j,k}` or `phi_{j,k}`.
pub fn levy_coefficient(
    jumps: &JumpSample,
    family: &WaveletFamily,
    index: DyadicIndex,
    kind: BasisKind,
) -> Result<f64> {
    index.validate()?;
    Ok(jumps
        .times
        .iter()
        .zip(&jumps.sizes)
        .map(|(t, y)| family.evaluate_unchecked(index, kind, *t) * y)
        .sum())
}

/// Coefficient field of one jump sample up to `max_level`. Jumps are
/// visited in sample order.
pub fn field_from_jumps(jumps: &JumpSample, family: &WaveletFamily, max_level: u32) -> CoefficientField {
    let mut field = CoefficientField::zeros(max_level);
    let mut coarse = 0.0;
    for (t, y) in jumps.times.iter().zip(&jumps.sizes) {
        coarse += family.evaluate_unchecked(DyadicIndex::new(0, 0), BasisKind::Scaling, *t) * y;
        for j in 0..=max_level {
            let level = field.level_mut(j);
            family.for_each_active(j, BasisKind::Wavelet, *t, |k, v| level[k] += v * y);
        }
    }
    field.set_coarse(coarse);
    field
}

/// `xi_eps` truncated at level `max_level`, from the jump sample of `seed`.
pub fn synthesize_levy_field(
    spec: &LevyMeasureSpec,
    eps: f64,
    max_level: u32,
    seed: u64,
    family: &WaveletFamily,
) -> Result<CoefficientField> {
    let jumps = sample_large_jumps(spec, eps, seed)?;
    Ok(field_from_jumps(&jumps, family, max_level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::measure::sample_large_jumps;

    #[test]
    fn empty_sample_gives_zero() {
        let j = JumpSample::empty(0.1, 1.0);
        let h = WaveletFamily::haar();
        assert_eq!(levy_coefficient(&j, &h, DyadicIndex::new(2, 1), BasisKind::Wavelet).unwrap(), 0.0);
        assert!(field_from_jumps(&j, &h, 4).is_zero());
    }

    #[test]
    fn single_jump() {
        let j = JumpSample { eps: 0.1, horizon: 1.0, times: vec![0.25], sizes: vec![2.0] };
        let h = WaveletFamily::haar();
        let v = levy_coefficient(&j, &h, DyadicIndex::new(0, 0), BasisKind::Wavelet).unwrap();
        assert_eq!(v, 2.0);
        let v = levy_coefficient(&j, &h, DyadicIndex::new(2, 1), BasisKind::Wavelet).unwrap();
        assert_eq!(v, 2.0 * 2.0);
        assert!(levy_coefficient(&j, &h, DyadicIndex::new(2, 4), BasisKind::Wavelet).is_err());
    }

    /// Stieltjes integral of the piecewise-constant Haar function against the
    /// jump path, using path increments over the dyadic pieces.
    fn haar_path_integral(j: &JumpSample, level: u32, k: usize) -> f64 {
        let w = 1.0 / (1u64 << level) as f64;
        let (a, m, b) = (k as f64 * w, (k as f64 + 0.5) * w, (k as f64 + 1.0) * w);
        let incr = |lo: f64, hi: f64| {
            // L(hi-) - L(lo-), half-open pieces [lo, hi)
            let before = |x: f64| j.times.iter().zip(&j.sizes).filter(|(t, _)| **t < x).map(|(_, y)| y).sum::<f64>();
            before(hi) - before(lo)
        };
        ((1u64 << level) as f64).sqrt() * (incr(a, m) - incr(m, b))
    }

    #[test]
    fn agrees_with_path_integral() {
        let spec = LevyMeasureSpec::new(1.5, 1.0, None).unwrap();
        let jumps = sample_large_jumps(&spec, 0.05, 99).unwrap();
        let h = WaveletFamily::haar();
        let field = field_from_jumps(&jumps, &h, 6);
        let scale: f64 = jumps.sizes.iter().map(|y| y.abs()).sum::<f64>() * 8.0;
        for level in 0..=6 {
            for k in 0..(1usize << level) {
                let oracle = haar_path_integral(&jumps, level, k);
                let direct = levy_coefficient(&jumps, &h, DyadicIndex::new(level, k as i64), BasisKind::Wavelet).unwrap();
                assert!((oracle - direct).abs() <= 1e-14 * scale);
                assert!((oracle - field.get(level, k)).abs() <= 1e-14 * scale);
            }
        }
        assert!((field.coarse() - jumps.path_value(1.0)).abs() <= 1e-14 * scale);
    }

    #[test]
    fn daubechies_field_matches_pointwise_sum() {
        let spec = LevyMeasureSpec::new(1.1, 1.0, Some(5.0)).unwrap();
        let jumps = sample_large_jumps(&spec, 0.2, 5).unwrap();
        let d = WaveletFamily::daubechies(2).unwrap();
        let field = field_from_jumps(&jumps, &d, 4);
        for level in 0..=4 {
            for k in 0..(1usize << level) {
                let direct = levy_coefficient(&jumps, &d, DyadicIndex::new(level, k as i64), BasisKind::Wavelet).unwrap();
                assert!((direct - field.get(level, k)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn synthesis_edge_cases() {
        let spec = LevyMeasureSpec::new(1.5, 1.0, Some(1.0)).unwrap();
        let h = WaveletFamily::haar();
        assert!(synthesize_levy_field(&spec, 1.0, 5, 1, &h).unwrap().is_zero());
        assert!(synthesize_levy_field(&spec, 2.0, 5, 1, &h).unwrap().is_zero());
        let a = synthesize_levy_field(&spec, 0.05, 5, 1, &h).unwrap();
        let b = synthesize_levy_field(&spec, 0.05, 5, 1, &h).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coupled_fields_differ_by_band_contribution() {
        let spec = LevyMeasureSpec::new(1.2, 1.0, None).unwrap();
        let h = WaveletFamily::haar();
        let stream = sample_large_jumps(&spec, 0.01, 8).unwrap();
        let fine = field_from_jumps(&stream, &h, 7);
        let coarse = field_from_jumps(&stream.restrict(0.05).unwrap(), &h, 7);
        let band = field_from_jumps(&stream.band(0.01, 0.05), &h, 7);
        let diff = fine.sub(&coarse.add(&band)).to_vec();
        let scale: f64 = stream.sizes.iter().map(|y| y.abs()).sum::<f64>() * 16.0;
        assert!(diff.iter().all(|d| d.abs() <= 1e-14 * scale));
    }
}
