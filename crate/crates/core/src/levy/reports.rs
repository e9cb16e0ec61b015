//! Monte Carlo reports on synthesized Lévy coefficient fields.
//!
//! Every report is a pure function of its inputs and `seed`; member `m`
//! draws from the generator at `seed::derive(seed, [stream, m])`.

use std::io::Write;

use rand::Rng as _;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use super::coeffs::field_from_jumps;
use super::measure::{sample_jumps, LevyMeasureSpec};
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::ndjson;
use crate::seed;
use crate::stats::{self, LinearFit};
use crate::wavelet::{BesovParams, WaveletFamily};

/// Levels below this are pre-asymptotic and left out of slope fits.
pub const FIT_MIN_LEVEL: u32 = 2;

/// Minimum ensemble size for any fitted report.
pub const MIN_SAMPLES: usize = 100;

/// One `(j, statistic)` record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub j: u32,
    pub statistic: String,
    pub value: f64,
    pub stderr: f64,
}

/// Summary record of one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub fit: String,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub n_points: usize,
    pub target: f64,
}

impl FitRecord {
    pub fn new(name: &str, fit: &LinearFit, target: f64) -> FitRecord {
        FitRecord {
            fit: name.to_string(),
            slope: fit.slope,
            intercept: fit.intercept,
            stderr: fit.stderr,
            n_points: fit.n_points,
            target,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    pub spec: LevyMeasureSpec,
    pub eps: f64,
    pub p: f64,
    pub max_level: u32,
    pub samples: usize,
    /// `E|zeta_{j,k}|^p` per level, averaged over shifts and members.
    pub levels: Vec<LevelRecord>,
    /// Fit of `log2 E|zeta_{j,k}|^p` against `j` on `[FIT_MIN_LEVEL, max_level]`;
    /// absent when the moments vanish.
    pub fit: Option<LinearFit>,
    /// `p/2 - 1`, the exponent of `int |psi_{j,k}|^p`.
    pub target_slope: f64,
}

impl MomentReport {
    pub fn write_ndjson<W: Write>(&self, mut w: W) -> Result<()> {
        ndjson::write_all(&mut w, &self.levels)?;
        if let Some(fit) = &self.fit {
            ndjson::write_line(&mut w, &FitRecord::new("log2_moment_vs_level", fit, self.target_slope))?;
        }
        Ok(())
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_SAMPLES, got: samples });
    }
    Ok(())
}

/// Per-level Monte Carlo estimate of `E|zeta_{j,k}|^p` and its log-linear
/// slope in `j`.
#[allow(clippy::too_many_arguments)]
pub fn moment_scaling_report(
    spec: &LevyMeasureSpec,
    eps: f64,
    p: f64,
    max_level: u32,
    samples: usize,
    seed: u64,
    family: &WaveletFamily,
    exec: Exec,
) -> Result<MomentReport> {
    spec.validate()?;
    if !(p > spec.alpha && p < 2.0) {
        return domain(format!("moment order p = {p} must lie in (alpha, 2) = ({}, 2)", spec.alpha));
    }
    check_samples(samples)?;
    if max_level < FIT_MIN_LEVEL + 1 {
        return domain(format!("max level {max_level} leaves fewer than two fit levels"));
    }
    let per_member: Vec<Result<Vec<f64>>> = exec.map(samples, |m| {
        let mut rng = seed::rng(seed, &[seed::stream::JUMPS, m as u64]);
        let jumps = sample_jumps(spec, eps, 1.0, &mut rng)?;
        let field = field_from_jumps(&jumps, family, max_level);
        Ok((0..=max_level)
            .map(|j| field.level_p_sum(j, p) / field.level(j).len() as f64)
            .collect())
    });
    let per_member = per_member.into_iter().collect::<Result<Vec<_>>>()?;

    let levels: Vec<LevelRecord> = (0..=max_level)
        .map(|j| {
            let xs: Vec<f64> = per_member.iter().map(|v| v[j as usize]).collect();
            LevelRecord { j, statistic: "mean_abs_p".into(), value: stats::mean(&xs), stderr: stats::std_error(&xs) }
        })
        .collect();
    let fit = fit_levels(&levels);
    Ok(MomentReport {
        spec: *spec,
        eps,
        p,
        max_level,
        samples,
        levels,
        fit,
        target_slope: p / 2.0 - 1.0,
    })
}

fn fit_levels(levels: &[LevelRecord]) -> Option<LinearFit> {
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .filter(|r| r.j >= FIT_MIN_LEVEL && r.value > 0.0)
        .map(|r| (r.j as f64, r.value.log2()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    Some(LinearFit::fit(&xs, &ys))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationPoint {
    pub eps_hi: f64,
    pub eps_lo: f64,
    /// `E |xi_{eps_hi} - xi_{eps_lo}|^p_{B^s_{p,p}}`
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationReport {
    pub spec: LevyMeasureSpec,
    pub p: f64,
    pub s: f64,
    pub max_level: u32,
    pub samples: usize,
    pub points: Vec<TruncationPoint>,
    /// Fit of `ln E|...|^p` against `ln min(eps_hi, eps_lo)`.
    pub fit: LinearFit,
    /// `2 - p`.
    pub target_slope: f64,
}

impl TruncationReport {
    pub fn write_ndjson<W: Write>(&self, mut w: W) -> Result<()> {
        ndjson::write_all(&mut w, &self.points)?;
        ndjson::write_line(&mut w, &FitRecord::new("ln_difference_vs_ln_eps", &self.fit, self.target_slope))
    }
}

/// Rate at which coupled truncations `xi_eps` converge in `B^s_{p,p}`.
/// All fields of one member are thinned from a single jump stream sampled at
/// the smallest truncation level, so consecutive differences contain only the
/// jumps with sizes in `(eps_lo, eps_hi]`.
#[allow(clippy::too_many_arguments)]
pub fn truncation_convergence_report(
    spec: &LevyMeasureSpec,
    eps_list: &[f64],
    p: f64,
    s: f64,
    max_level: u32,
    samples: usize,
    seed: u64,
    family: &WaveletFamily,
    exec: Exec,
) -> Result<TruncationReport> {
    spec.validate()?;
    let params = BesovParams::new(s, p)?;
    if !(p < 2.0) {
        return domain(format!("p = {p} must lie in [1, 2)"));
    }
    if !(s < 1.0 / p - 1.0) {
        return domain(format!("smoothness s = {s} must be below 1/p - 1 = {}", 1.0 / p - 1.0));
    }
    check_samples(samples)?;
    let mut eps: Vec<f64> = eps_list.to_vec();
    if eps.iter().any(|e| !(*e > 0.0)) {
        return domain("truncation levels must be positive");
    }
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    if eps.len() < 3 {
        return domain("need at least three distinct truncation levels");
    }
    let eps_min = *eps.last().unwrap();

    let per_member: Vec<Result<Vec<f64>>> = exec.map(samples, |m| {
        let mut rng = seed::rng(seed, &[seed::stream::JUMPS, m as u64]);
        let stream = sample_jumps(spec, eps_min, 1.0, &mut rng)?;
        let fields = eps
            .iter()
            .map(|e| Ok(field_from_jumps(&stream.restrict(*e)?, family, max_level)))
            .collect::<Result<Vec<_>>>()?;
        Ok(fields.windows(2).map(|w| w[1].sub(&w[0]).besov_power(params)).collect())
    });
    let per_member = per_member.into_iter().collect::<Result<Vec<_>>>()?;

    let points: Vec<TruncationPoint> = eps
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let xs: Vec<f64> = per_member.iter().map(|v| v[i]).collect();
            TruncationPoint { eps_hi: w[0], eps_lo: w[1], mean: stats::mean(&xs), stderr: stats::std_error(&xs) }
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|q| q.eps_lo.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|q| q.mean.ln()).collect();
    Ok(TruncationReport {
        spec: *spec,
        p,
        s,
        max_level,
        samples,
        fit: LinearFit::fit(&xs, &ys),
        points,
        target_slope: 2.0 - p,
    })
}

/// Path simulation settings for [`small_ball_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmallBallConfig {
    /// Uniform time steps on `[0, 1]`.
    pub steps: usize,
    /// Jumps below this size are replaced by a Brownian part of matched variance.
    pub small_jump_cutoff: f64,
    /// Checkpoints of the survival curve used for the decay-rate fit.
    pub checkpoints: usize,
    /// Survival-curve fits start at this time.
    pub burn_in: f64,
    /// Checkpoints with fewer survivors are left out of the decay-rate fit.
    pub min_survivors: usize,
    /// Member batches for the jackknife band on the exponent.
    pub batches: usize,
}

impl Default for SmallBallConfig {
    fn default() -> Self {
        SmallBallConfig {
            steps: 1000,
            small_jump_cutoff: 1e-3,
            checkpoints: 40,
            burn_in: 0.3,
            min_survivors: 20,
            batches: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallBallPoint {
    pub eps: f64,
    /// Paths with `sup_{t<=1} |L(t)| <= eps`.
    pub hits: usize,
    pub probability: f64,
    pub neg_log_probability: f64,
    /// Exponential decay rate of `t -> P(sup_{s<=t} |L(s)| <= eps)`.
    pub decay_rate: Option<f64>,
    pub censored: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmallBallReport {
    pub spec: LevyMeasureSpec,
    pub samples: usize,
    pub config: SmallBallConfig,
    pub points: Vec<SmallBallPoint>,
    /// Exponent from `ln(decay rate)` against `ln eps` (slope is `-alpha`).
    pub alpha_hat: f64,
    /// Jackknife standard error of `alpha_hat` over member batches.
    pub alpha_stderr: f64,
    pub rate_fit: Option<LinearFit>,
    /// Exponent from `ln(-ln P)` against `ln eps` at the horizon.
    pub alpha_hat_horizon: Option<f64>,
    pub horizon_fit: Option<LinearFit>,
    pub censored: Vec<f64>,
}

impl SmallBallReport {
    pub fn write_ndjson<W: Write>(&self, mut w: W) -> Result<()> {
        ndjson::write_all(&mut w, &self.points)?;
        if let Some(f) = &self.rate_fit {
            ndjson::write_line(&mut w, &FitRecord::new("ln_decay_rate_vs_ln_eps", f, -self.spec.alpha))?;
        }
        if let Some(f) = &self.horizon_fit {
            ndjson::write_line(&mut w, &FitRecord::new("ln_neg_log_p_vs_ln_eps", f, -self.spec.alpha))?;
        }
        Ok(())
    }

    pub fn band(&self) -> f64 {
        1.96 * self.alpha_stderr
    }
}

/// First times at which `|L|` exceeds each level of `eps_sorted` (ascending);
/// `f64::INFINITY` when the path stays inside up to `t = 1`.
fn exit_times(
    spec: &LevyMeasureSpec,
    eps_sorted: &[f64],
    config: &SmallBallConfig,
    rng: &mut seed::Rng,
) -> Vec<f64> {
    let mut exits = vec![f64::INFINITY; eps_sorted.len()];
    let eps_top = *eps_sorted.last().unwrap();
    let dt = 1.0 / config.steps as f64;
    let sigma = (spec.small_jump_variance(config.small_jump_cutoff) * dt).sqrt();
    let rate = spec.tail_mass(config.small_jump_cutoff).unwrap_or(0.0);
    let arrivals = (rate > 0.0).then(|| Exp::new(rate).unwrap());
    let mut next_jump = arrivals.as_ref().map_or(f64::INFINITY, |e| e.sample(rng));
    let mut value = 0.0f64;
    let mut exited = 0usize;
    let mut record = |v: f64, t: f64, exited: &mut usize| {
        while *exited < eps_sorted.len() && v.abs() > eps_sorted[*exited] {
            exits[*exited] = t;
            *exited += 1;
        }
    };
    for i in 0..config.steps {
        let t_end = (i + 1) as f64 * dt;
        while next_jump < t_end {
            let magnitude = spec.jump_size_quantile(config.small_jump_cutoff, rng.random::<f64>());
            value += if rng.random::<bool>() { magnitude } else { -magnitude };
            record(value, next_jump, &mut exited);
            next_jump += arrivals.as_ref().unwrap().sample(rng);
        }
        let z: f64 = StandardNormal.sample(rng);
        value += sigma * z;
        record(value, t_end, &mut exited);
        if value.abs() > eps_top && exited == eps_sorted.len() {
            break;
        }
    }
    exits
}

/// Estimates `P(sup_{t<=1} |L(t)| <= eps)` by path simulation and the
/// exponent `alpha` of `-log P ~ K eps^-alpha`.
///
/// Two estimators are reported. The primary one fits the exponential decay
/// rate `lambda(eps)` of the survival curve `t -> P(sup_{s<=t}|L| <= eps)`
/// after a burn-in, then regresses `ln lambda` on `ln eps`; this removes the
/// prefactor of the survival probability. The horizon estimator regresses
/// `ln(-ln P)` on `ln eps` directly.
pub fn small_ball_report(
    spec: &LevyMeasureSpec,
    eps_grid: &[f64],
    samples: usize,
    seed: u64,
    config: SmallBallConfig,
    exec: Exec,
) -> Result<SmallBallReport> {
    spec.validate()?;
    check_samples(samples)?;
    if config.steps == 0 || config.checkpoints < 3 || config.batches < 2 || !(config.small_jump_cutoff > 0.0) {
        return domain("invalid small-ball simulation settings");
    }
    let mut eps: Vec<f64> = eps_grid.to_vec();
    if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return domain("small-ball radii must be positive and finite");
    }
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if eps.len() < 2 {
        return domain("need at least two small-ball radii");
    }
    let exits: Vec<Vec<f64>> = exec.map(samples, |m| {
        let mut rng = seed::rng(seed, &[seed::stream::PATH, m as u64]);
        exit_times(spec, &eps, &config, &mut rng)
    });

    let full = estimate(&eps, &exits, &config);
    let batch_len = samples / config.batches;
    let mut jack = Vec::new();
    for b in 0..config.batches {
        let subset: Vec<Vec<f64>> = exits
            .iter()
            .enumerate()
            .filter(|(m, _)| m / batch_len.max(1) != b)
            .map(|(_, e)| e.clone())
            .collect();
        if let Some(f) = estimate(&eps, &subset, &config).rate_fit {
            jack.push(-f.slope);
        }
    }
    let alpha_stderr = if jack.len() >= 2 {
        let nb = jack.len() as f64;
        let m = stats::mean(&jack);
        ((nb - 1.0) / nb * jack.iter().map(|a| (a - m).powi(2)).sum::<f64>()).sqrt()
    } else {
        f64::NAN
    };
    let censored = full.points.iter().filter(|p| p.censored).map(|p| p.eps).collect();
    Ok(SmallBallReport {
        spec: *spec,
        samples,
        config,
        alpha_hat: full.rate_fit.map_or(f64::NAN, |f| -f.slope),
        alpha_stderr,
        rate_fit: full.rate_fit,
        alpha_hat_horizon: full.horizon_fit.map(|f| -f.slope),
        horizon_fit: full.horizon_fit,
        points: full.points,
        censored,
    })
}

struct Estimate {
    points: Vec<SmallBallPoint>,
    rate_fit: Option<LinearFit>,
    horizon_fit: Option<LinearFit>,
}

fn estimate(eps: &[f64], exits: &[Vec<f64>], config: &SmallBallConfig) -> Estimate {
    let n = exits.len() as f64;
    let checkpoints: Vec<f64> = (1..=config.checkpoints).map(|c| c as f64 / config.checkpoints as f64).collect();
    let points: Vec<SmallBallPoint> = eps
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let hits = exits.iter().filter(|x| x[i].is_infinite()).count();
            let probability = hits as f64 / n;
            let (ts, ys): (Vec<f64>, Vec<f64>) = checkpoints
                .iter()
                .filter(|&&t| t >= config.burn_in)
                .filter_map(|&t| {
                    let alive = exits.iter().filter(|x| x[i] > t).count();
                    (alive >= config.min_survivors).then(|| (t, (alive as f64 / n).ln()))
                })
                .unzip();
            let decay_rate = (ts.len() >= 3).then(|| -LinearFit::fit(&ts, &ys).slope).filter(|r| *r > 0.0);
            SmallBallPoint {
                eps: e,
                hits,
                probability,
                neg_log_probability: -probability.ln(),
                decay_rate,
                censored: hits == 0,
            }
        })
        .collect();
    let fit_on = |f: &dyn Fn(&SmallBallPoint) -> Option<f64>| -> Option<LinearFit> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().filter_map(|p| f(p).map(|y| (p.eps.ln(), y))).unzip();
        (xs.len() >= 2).then(|| LinearFit::fit(&xs, &ys))
    };
    let rate_fit = fit_on(&|p| p.decay_rate.map(f64::ln));
    let horizon_fit = fit_on(&|p| (p.hits > 0 && p.probability < 1.0).then(|| p.neg_log_probability.ln()));
    Estimate { points, rate_fit, horizon_fit }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_report_preconditions() {
        let spec = LevyMeasureSpec::new(1.5, 1.0, Some(1.0)).unwrap();
        let h = WaveletFamily::haar();
        assert!(matches!(
            moment_scaling_report(&spec, 0.01, 1.8, 6, 99, 1, &h, Exec::Sequential),
            Err(Error::InsufficientSamples { .. })
        ));
        assert!(moment_scaling_report(&spec, 0.01, 1.4, 6, 200, 1, &h, Exec::Sequential).is_err());
        assert!(moment_scaling_report(&spec, 0.01, 2.0, 6, 200, 1, &h, Exec::Sequential).is_err());
    }

    #[test]
    fn moment_of_zero_field_vanishes() {
        let spec = LevyMeasureSpec::new(1.5, 1.0, Some(1.0)).unwrap();
        let r = moment_scaling_report(&spec, 1.0, 1.8, 5, 100, 1, &WaveletFamily::haar(), Exec::Sequential).unwrap();
        assert!(r.levels.iter().all(|l| l.value == 0.0));
        assert!(r.fit.is_none());
    }

    #[test]
    fn moment_report_is_reproducible_across_exec_modes() {
        let spec = LevyMeasureSpec::new(1.5, 1.0, Some(1.0)).unwrap();
        let h = WaveletFamily::haar();
        let a = moment_scaling_report(&spec, 0.05, 1.8, 5, 300, 9, &h, Exec::Sequential).unwrap();
        let b = moment_scaling_report(&spec, 0.05, 1.8, 5, 300, 9, &h, Exec::Parallel).unwrap();
        assert_eq!(a.levels, b.levels);
        let mut buf = Vec::new();
        a.write_ndjson(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.lines().last().unwrap().contains("\"n_points\":4"));
    }

    #[test]
    fn truncation_preconditions_and_zero_difference() {
        let spec = LevyMeasureSpec::new(1.2, 1.0, None).unwrap();
        let h = WaveletFamily::haar();
        // s must be below 1/p - 1
        assert!(truncation_convergence_report(&spec, &[0.2, 0.1, 0.05], 1.5, 0.0, 5, 100, 1, &h, Exec::Sequential).is_err());
        assert!(truncation_convergence_report(&spec, &[0.2, 0.2, 0.1], 1.5, -0.5, 5, 100, 1, &h, Exec::Sequential).is_err());
        // identical truncation from one stream: difference exactly zero
        let mut rng = seed::rng(5, &[0]);
        let stream = sample_jumps(&spec, 0.05, 1.0, &mut rng).unwrap();
        let a = field_from_jumps(&stream.restrict(0.1).unwrap(), &h, 6);
        let b = field_from_jumps(&stream.restrict(0.1).unwrap(), &h, 6);
        assert!(a.sub(&b).is_zero());
    }

    #[test]
    fn small_ball_probability_tends_to_one_for_large_radius() {
        let spec = LevyMeasureSpec::new(1.0, 1.0, None).unwrap();
        let config = SmallBallConfig { steps: 200, ..SmallBallConfig::default() };
        let r = small_ball_report(&spec, &[0.5, 1e6, 1e9], 400, 3, config, Exec::Parallel).unwrap();
        let big = r.points.iter().find(|p| p.eps == 1e9).unwrap();
        assert!(big.probability > 0.999);
        assert!(big.neg_log_probability < 1e-2);
        assert!(r.points[0].probability < big.probability);
    }

    #[test]
    fn censoring_is_reported() {
        let spec = LevyMeasureSpec::new(1.0, 1.0, None).unwrap();
        let config = SmallBallConfig { steps: 100, ..SmallBallConfig::default() };
        let r = small_ball_report(&spec, &[1e-4, 1.0], 100, 3, config, Exec::Sequential).unwrap();
        assert_eq!(r.censored, vec![1e-4]);
    }
}
