mod common;

use common::fbm_covariance_quadrature;
use density_lab::fbm::*;
use density_lab::wavelet::DyadicIndex;

fn detail(j: u32, k: i64) -> HaarFunction {
    HaarFunction::Detail(DyadicIndex::new(j, k))
}

#[test]
fn entries_match_quadrature() {
    let cases = [
        (0.75, detail(0, 0), detail(0, 0)),
        (0.75, detail(3, 2), detail(3, 5)),
        (0.6, detail(4, 3), detail(4, 4)),
        (0.9, detail(2, 1), detail(5, 9)),
        (0.75, HaarFunction::Coarse, detail(3, 1)),
        (0.55, detail(6, 0), detail(6, 63)),
        (0.8, detail(1, 0), detail(8, 200)),
        (0.65, detail(8, 17), detail(8, 201)),
    ];
    for (h, f, g) in cases {
        let exact = covariance_between(&FbmSpec::new(h, 10).unwrap(), f, g).unwrap();
        let q = fbm_covariance_quadrature(h, f, g);
        assert!((exact - q).abs() <= 1e-8 * q.abs(), "{h} {f:?} {g:?}: {exact} vs {q}");
    }
}

#[test]
fn level_matrix_matches_quadrature() {
    let s = FbmSpec::new(0.75, 3).unwrap();
    let c = build_level_covariance(&s, 3).unwrap();
    for k in 0..8 {
        for l in 0..8 {
            let q = fbm_covariance_quadrature(0.75, detail(3, k), detail(3, l));
            assert!((c.matrix[(k as usize, l as usize)] - q).abs() < 1e-8 * c.matrix[(0, 0)]);
        }
    }
}

#[test]
fn sampled_coefficients_have_the_exact_covariance() {
    let s = FbmSpec::new(0.7, 2).unwrap();
    let layout = joint_layout(2);
    let exact = joint_covariance(&s);
    let sampler = FbmSampler::new(&s).unwrap();
    let n = 20_000;
    let draws: Vec<Vec<f64>> = (0..n).map(|m| sampler.sample(m).to_vec()).collect();
    let d = layout.len();
    for a in 0..d {
        for b in 0..d {
            let emp = draws.iter().map(|x| x[a] * x[b]).sum::<f64>() / n as f64;
            let sd = ((exact[(a, a)] * exact[(b, b)] + exact[(a, b)].powi(2)) / n as f64).sqrt();
            assert!((emp - exact[(a, b)]).abs() < 5.0 * sd, "({a},{b}) {emp} vs {}", exact[(a, b)]);
        }
    }
}
