//! Pipeline execution, artifact files and the run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use density_lab::density::{
    atom_test, conditional_kernel_probe, continuity_in_initial_condition, run_ensemble, AtomTestConfig, ProbeConfig,
    ProjectionSubspace,
};
use density_lab::fbm::{build_level_covariance, covariance_entry, FbmSampler, FbmSpec};
use density_lab::levy::{moment_scaling_report, small_ball_report, synthesize_levy_field, truncation_convergence_report};
use density_lab::nse::solve;
use density_lab::seed::{self, stream};
use density_lab::stats::LinearFit;
use density_lab::torus::{is_saturating_up_to, ModeSet};
use density_lab::wavelet::{WaveletFamily, WaveletKind};
use density_lab::{Error, Exec};
use serde::{Deserialize, Serialize};

use crate::config::{self, ExperimentConfig, Invalid, Kind, MAX_COVARIANCE_LEVEL};

/// Tolerances of the statistical checks behind `--strict`.
pub const MOMENT_SLOPE_TOL: f64 = 0.15;
pub const TRUNCATION_SLOPE_SLACK: f64 = 0.2;
pub const SMALL_BALL_TOL: f64 = 0.2;
pub const FBM_VARIANCE_TOL: f64 = 0.1;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Divergence(String),
    Acceptance(String),
    Io(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Invalid(_) | Failure::Io(_) => 1,
            Failure::Divergence(_) => 2,
            Failure::Acceptance(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "invalid configuration: {m}"),
            Failure::Divergence(m) => write!(f, "numerical failure: {m}"),
            Failure::Acceptance(m) => write!(f, "acceptance failed: {m}"),
            Failure::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Divergence { .. } | Error::ExcessiveExclusion { .. } | Error::NotPsd(_) => {
                Failure::Divergence(e.to_string())
            }
            Error::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<Invalid> for Failure {
    fn from(e: Invalid) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub detail: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub density_lab: String,
    pub density_lab_cli: String,
}

impl Versions {
    pub fn current() -> Versions {
        Versions { density_lab: density_lab::VERSION.into(), density_lab_cli: env!("CARGO_PKG_VERSION").into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: Kind,
    pub config_hash: String,
    pub base_seed: u64,
    pub versions: Versions,
    pub threads: usize,
    pub started_unix: u64,
    pub wall_time_s: f64,
    pub artifacts: Vec<String>,
    pub verdicts: Vec<Verdict>,
    /// The full configuration: rerunning it reproduces every artifact.
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn read(dir: &Path) -> Result<Manifest, Failure> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// A TOML config, or a manifest whose embedded config is rerun.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let m: Manifest = serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
        return Ok(m.config);
    }
    Ok(config::load(path)?)
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces the configured output directory.
    pub output: Option<PathBuf>,
    pub strict: bool,
    pub exec: Exec,
}

struct Artifacts {
    dir: PathBuf,
    names: Vec<String>,
}

impl Artifacts {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>, Failure> {
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        self.names.push(name.to_string());
        Ok(BufWriter::new(f))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn with<F>(&mut self, name: &str, f: F) -> Result<(), Failure>
    where
        F: FnOnce(&mut BufWriter<File>) -> density_lab::Result<()>,
    {
        let mut w = self.create(name)?;
        f(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

fn verdict(check: &str, passed: bool, detail: String) -> Verdict {
    Verdict { check: check.into(), detail, passed }
}

/// Mean of `sum_k zeta_{j,k}^2` per level over the drawn fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelEnergy {
    pub j: u32,
    pub mean_square_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbmVariance {
    pub hurst: f64,
    /// `Var zeta_{j,k}`, the same for every shift `k`.
    pub levels: Vec<(u32, f64)>,
    /// `log2 Var` against `j` over `j >= 2`.
    pub fit: Option<LinearFit>,
    /// Target for the fitted slope minus one.
    pub target_slope: f64,
}

fn level_energies(fields: &[density_lab::wavelet::CoefficientField], max_level: u32) -> Vec<LevelEnergy> {
    (0..=max_level)
        .map(|j| LevelEnergy {
            j,
            mean_square_sum: fields.iter().map(|f| f.level_p_sum(j, 2.0)).sum::<f64>() / fields.len() as f64,
        })
        .collect()
}

fn synthesize_levy(c: &config::SynthesizeLevy, base: u64, exec: Exec, out: &mut Artifacts) -> Result<Vec<Verdict>, Failure> {
    let family = WaveletFamily::from_kind(c.wavelet)?;
    let fields = exec.map(c.samples, |m| {
        synthesize_levy_field(&c.levy, c.eps, c.max_level, seed::derive(base, &[stream::ENSEMBLE, m as u64]), &family)
    });
    let fields = fields.into_iter().collect::<density_lab::Result<Vec<_>>>()?;
    for (m, f) in fields.iter().enumerate() {
        out.with(&format!("field_{m:04}.ndjson"), |w| f.write_ndjson(c.wavelet, w))?;
    }
    out.json("levels.json", &level_energies(&fields, c.max_level))?;
    Ok(vec![])
}

fn synthesize_fbm(c: &config::SynthesizeFbm, base: u64, exec: Exec, out: &mut Artifacts) -> Result<Vec<Verdict>, Failure> {
    let spec = FbmSpec::new(c.hurst, c.max_level)?;
    let sampler = FbmSampler::cached(&spec)?;
    let fields = exec.map(c.samples, |m| sampler.sample(seed::derive(base, &[stream::ENSEMBLE, m as u64])));
    for (m, f) in fields.iter().enumerate() {
        out.with(&format!("field_{m:04}.ndjson"), |w| f.write_ndjson(WaveletKind::Haar, w))?;
    }
    out.json("levels.json", &level_energies(&fields, c.max_level))?;
    if c.covariance {
        for j in 0..=c.max_level.min(MAX_COVARIANCE_LEVEL) {
            let cov = build_level_covariance(&spec, j)?;
            out.with(&format!("covariance_{j:02}.csv"), |w| cov.write_csv(w))?;
        }
    }
    let levels = (0..=c.max_level)
        .map(|j| Ok((j, covariance_entry(&spec, j, 0, 0)?)))
        .collect::<density_lab::Result<Vec<_>>>()?;
    let fit_pts: Vec<(f64, f64)> = levels.iter().filter(|l| l.0 >= 2).map(|l| (l.0 as f64, l.1.log2())).collect();
    let fit = (fit_pts.len() >= 3).then(|| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = fit_pts.into_iter().unzip();
        LinearFit::fit(&xs, &ys)
    });
    let variance = FbmVariance { hurst: c.hurst, levels, fit, target_slope: -2.0 * c.hurst };
    let mut verdicts = vec![];
    if let Some(f) = &fit {
        let slope = f.slope - 1.0;
        verdicts.push(verdict(
            "variance decay",
            (slope - variance.target_slope).abs() <= FBM_VARIANCE_TOL,
            format!("slope {slope:.4}, target {:.2} +- {FBM_VARIANCE_TOL}", variance.target_slope),
        ));
    }
    out.json("variance.json", &variance)?;
    Ok(verdicts)
}

fn check_moments(c: &config::CheckMoments, base: u64, exec: Exec, out: &mut Artifacts) -> Result<Vec<Verdict>, Failure> {
    let family = WaveletFamily::from_kind(c.wavelet)?;
    let mut verdicts = vec![];
    if let Some(m) = &c.moments {
        let r = moment_scaling_report(&c.levy, m.eps, m.p, m.max_level, m.samples, seed::derive(base, &[1]), &family, exec)?;
        out.with("moments.ndjson", |w| r.write_ndjson(w))?;
        out.json("moments.json", &r)?;
        verdicts.push(match &r.fit {
            Some(f) => verdict(
                "moment slope",
                (f.slope - r.target_slope).abs() <= MOMENT_SLOPE_TOL,
                format!("slope {:.3} +- {:.3}, target {:.3} +- {MOMENT_SLOPE_TOL}", f.slope, f.stderr, r.target_slope),
            ),
            None => verdict("moment slope", false, "moments vanish; no fit".into()),
        });
    }
    if let Some(t) = &c.truncation {
        let r = truncation_convergence_report(
            &c.levy,
            &t.eps,
            t.p,
            t.s,
            t.max_level,
            t.samples,
            seed::derive(base, &[2]),
            &family,
            exec,
        )?;
        out.with("truncation.ndjson", |w| r.write_ndjson(w))?;
        out.json("truncation.json", &r)?;
        let floor = r.target_slope - TRUNCATION_SLOPE_SLACK;
        verdicts.push(verdict(
            "truncation rate",
            r.fit.slope >= floor,
            format!("slope {:.3} +- {:.3}, required >= {floor:.3}", r.fit.slope, r.fit.stderr),
        ));
    }
    if let Some(b) = &c.small_ball {
        let r = small_ball_report(&c.levy, &b.radii, b.samples, seed::derive(base, &[3]), b.settings, exec)?;
        out.with("small_ball.ndjson", |w| r.write_ndjson(w))?;
        out.json("small_ball.json", &r)?;
        verdicts.push(verdict(
            "small-ball exponent",
            (r.alpha_hat - c.levy.alpha).abs() <= SMALL_BALL_TOL,
            format!("alpha_hat {:.3} +- {:.3}, target {} +- {SMALL_BALL_TOL}", r.alpha_hat, r.alpha_stderr, c.levy.alpha),
        ));
    }
    Ok(verdicts)
}

fn saturate(c: &config::Saturate, out: &mut Artifacts) -> Result<Vec<Verdict>, Failure> {
    let k = ModeSet::symmetrized(c.sites.iter().copied());
    let r = is_saturating_up_to(&k, c.radius, c.max_iters)?;
    out.with("saturation.ndjson", |w| r.write_ndjson(w))?;
    out.json("saturation.json", &r)?;
    let sizes: Vec<usize> = r.history.iter().map(|h| h.size).collect();
    Ok(vec![verdict(
        "window coverage",
        r.covered == c.expect_covered,
        format!("covered {} (expected {}), sizes {sizes:?}", r.covered, c.expect_covered),
    )])
}

fn simulate(c: &config::Simulate, base: u64, out: &mut Artifacts) -> Result<Vec<Verdict>, Failure> {
    let u0 = config::velocity(c.solver.truncation, &c.u0)?;
    let path = c.forcing.path(&c.solver, seed::derive(base, &[stream::FORCING]))?;
    let rec = solve(&u0, &path, &c.solver)?;
    out.with("energy.csv", |w| rec.write_diagnostics_csv(w))?;
    out.with("trajectory.ndjson", |w| rec.write_ndjson(w))?;
    Ok(vec![])
}

fn ensemble(c: &config::Ensemble, base: u64, exec: Exec, out: &mut Artifacts) -> Result<Vec<Verdict>, Failure> {
    let u0 = config::velocity(c.solver.truncation, &c.u0)?;
    let f = ProjectionSubspace::new(c.subspace.clone())?;
    let sample = run_ensemble(&c.solver, &c.forcing, &u0, &f, c.members, base, exec)?;
    out.with("ensemble.csv", |w| sample.write_csv(w))?;
    let atom = c
        .atom
        .unwrap_or_default()
        .apply(AtomTestConfig { seed: seed::derive(base, &[stream::BOOTSTRAP]), ..AtomTestConfig::default() });
    let r = atom_test(&sample.rows, &atom)?;
    out.json("atoms.json", &r)?;
    Ok(vec![verdict(
        "no atoms",
        !r.atom_detected(),
        format!("p = {:.3}, near-duplicates {}, excluded members {}", r.p_value, r.nn_statistic, sample.excluded),
    )])
}

fn continuity(c: &config::Continuity, base: u64, exec: Exec, out: &mut Artifacts) -> Result<Vec<Verdict>, Failure> {
    let r = continuity_in_initial_condition(&c.to_core()?, base, exec)?;
    out.with("continuity.ndjson", |w| r.write_ndjson(w))?;
    out.json("continuity.json", &r)?;
    let mut v = vec![
        verdict("nonincreasing", r.nonincreasing, format!("trend {:+.2}", r.trend)),
        verdict(
            "reaches floor",
            r.reaches_floor,
            format!(
                "last distance {:.4}, floor {:.4} +- {:.4}",
                r.points.last().map_or(f64::NAN, |p| p.distance),
                r.floor_mean,
                r.floor_sd
            ),
        ),
    ];
    if let Some(p) = r.control_persists {
        v.push(verdict("control persists", p, "changed forcing law stays above the floor at the smallest delta".into()));
    }
    Ok(v)
}

fn kernel_probe(c: &config::KernelProbe, base: u64, exec: Exec, out: &mut Artifacts) -> Result<Vec<Verdict>, Failure> {
    let defaults = ProbeConfig::default();
    let cfg = ProbeConfig {
        level: c.level,
        samples: c.samples,
        cells: c.cells,
        min_occupancy: c.min_occupancy,
        atom: c.atom.unwrap_or_default().apply(defaults.atom),
    };
    let r = conditional_kernel_probe(&c.source, &cfg, base, exec)?;
    out.with("probe.ndjson", |w| r.write_ndjson(w))?;
    out.json("probe.json", &r)?;
    Ok(vec![verdict(
        "atoms as expected",
        r.any_atoms() == c.expect_atoms,
        format!("{} of {} tested cells with atoms, expected atoms {}", r.atoms_detected, r.tested(), c.expect_atoms),
    )])
}

/// Validates, runs the pipeline and writes artifacts plus the manifest.
/// The manifest is written even when a strict acceptance check fails.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<Manifest, Failure> {
    config.validate()?;
    let dir = opts.output.clone().unwrap_or_else(|| config.output.clone());
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let mut out = Artifacts { dir: dir.clone(), names: vec![] };
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let base = config.base_seed;
    let exec = opts.exec;
    let verdicts = match config.kind {
        Kind::SynthesizeLevy => synthesize_levy(config.synthesize_levy.as_ref().unwrap(), base, exec, &mut out)?,
        Kind::SynthesizeFbm => synthesize_fbm(config.synthesize_fbm.as_ref().unwrap(), base, exec, &mut out)?,
        Kind::CheckMoments => check_moments(config.check_moments.as_ref().unwrap(), base, exec, &mut out)?,
        Kind::Saturate => saturate(config.saturate.as_ref().unwrap(), &mut out)?,
        Kind::Simulate => simulate(config.simulate.as_ref().unwrap(), base, &mut out)?,
        Kind::Ensemble => ensemble(config.ensemble.as_ref().unwrap(), base, exec, &mut out)?,
        Kind::Continuity => continuity(config.continuity.as_ref().unwrap(), base, exec, &mut out)?,
        Kind::KernelProbe => kernel_probe(config.kernel_probe.as_ref().unwrap(), base, exec, &mut out)?,
    };
    let manifest = Manifest {
        kind: config.kind,
        config_hash: config.hash()?,
        base_seed: base,
        versions: Versions::current(),
        threads: if exec.is_parallel() { density_lab::exec::threads() } else { 1 },
        started_unix,
        wall_time_s: clock.elapsed().as_secs_f64(),
        artifacts: out.names.clone(),
        verdicts,
        config: config.clone(),
    };
    out.json(MANIFEST, &manifest)?;
    if opts.strict && !manifest.passed() {
        let failed: Vec<String> =
            manifest.verdicts.iter().filter(|v| !v.passed).map(|v| format!("{} ({})", v.check, v.detail)).collect();
        return Err(Failure::Acceptance(failed.join("; ")));
    }
    Ok(manifest)
}
