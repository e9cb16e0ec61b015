//! Experiment configuration: one TOML file, one table per experiment kind.
//!
//! The top level names the `kind`, the `base_seed` and the `output`
//! directory; the table named after the kind carries its parameters. Unknown
//! keys anywhere are errors. See `docs/config.md` for the schema.

use std::path::{Path, PathBuf};

use density_lab::density::{Bandwidth, ForcingSpec, NoiseLaw, NoiseSource, ProjectionSubspace, MIN_MEMBERS, MAX_PROBE_LEVEL};
use density_lab::fbm::FbmSpec;
use density_lab::levy::measure::LevyMeasureSpec;
use density_lab::levy::reports::{SmallBallConfig, FIT_MIN_LEVEL, MIN_SAMPLES};
use density_lab::nse::SolverConfig;
use density_lab::torus::{ModeIndex, Parity, SpectralVelocity};
use density_lab::wavelet::{BesovParams, WaveletFamily, WaveletKind};
use serde::{Deserialize, Serialize};

/// Coefficient fields and jump streams are cheap; this keeps files sane.
pub const MAX_FIELD_LEVEL: u32 = 20;
/// Dense covariance files stop here.
pub const MAX_COVARIANCE_LEVEL: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    SynthesizeLevy,
    SynthesizeFbm,
    CheckMoments,
    Saturate,
    Simulate,
    Ensemble,
    Continuity,
    KernelProbe,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::SynthesizeLevy => "synthesize_levy",
            Kind::SynthesizeFbm => "synthesize_fbm",
            Kind::CheckMoments => "check_moments",
            Kind::Saturate => "saturate",
            Kind::Simulate => "simulate",
            Kind::Ensemble => "ensemble",
            Kind::Continuity => "continuity",
            Kind::KernelProbe => "kernel_probe",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub base_seed: u64,
    pub output: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesize_levy: Option<SynthesizeLevy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesize_fbm: Option<SynthesizeFbm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_moments: Option<CheckMoments>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saturate: Option<Saturate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<Simulate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<Ensemble>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuity: Option<Continuity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_probe: Option<KernelProbe>,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn haar() -> WaveletKind {
    WaveletKind::Haar
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesizeLevy {
    pub levy: LevyMeasureSpec,
    pub eps: f64,
    pub max_level: u32,
    #[serde(default = "haar")]
    pub wavelet: WaveletKind,
    #[serde(default = "one")]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesizeFbm {
    pub hurst: f64,
    pub max_level: u32,
    #[serde(default = "one")]
    pub samples: usize,
    /// Also write the dense per-level covariance matrices.
    #[serde(default)]
    pub covariance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentCheck {
    pub eps: f64,
    pub p: f64,
    pub max_level: u32,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationCheck {
    pub eps: Vec<f64>,
    pub p: f64,
    pub s: f64,
    pub max_level: u32,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmallBallCheck {
    pub radii: Vec<f64>,
    pub samples: usize,
    #[serde(default)]
    pub settings: SmallBallConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckMoments {
    pub levy: LevyMeasureSpec,
    #[serde(default = "haar")]
    pub wavelet: WaveletKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<MomentCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub small_ball: Option<SmallBallCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Saturate {
    /// Generator sites; negatives and the origin are added.
    pub sites: Vec<(i32, i32)>,
    pub radius: i32,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Acceptance expects the window to be covered (or not).
    #[serde(default = "yes")]
    pub expect_covered: bool,
}

fn default_max_iters() -> usize {
    density_lab::torus::DEFAULT_MAX_ITERS
}

/// One nonzero coefficient of a velocity field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeValue {
    pub j1: i32,
    pub j2: i32,
    pub parity: Parity,
    pub value: f64,
}

pub fn velocity(truncation: u32, modes: &[ModeValue]) -> density_lab::Result<SpectralVelocity> {
    let pairs = modes
        .iter()
        .map(|m| Ok((ModeIndex::new(m.j1, m.j2, m.parity)?, m.value)))
        .collect::<density_lab::Result<Vec<_>>>()?;
    SpectralVelocity::from_modes(truncation, &pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Simulate {
    pub solver: SolverConfig,
    #[serde(default)]
    pub u0: Vec<ModeValue>,
    pub forcing: ForcingSpec,
}

/// Atom-test settings; the bootstrap seed is derived from `base_seed`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_samples: Option<usize>,
}

impl AtomSettings {
    pub fn apply(&self, base: density_lab::density::AtomTestConfig) -> density_lab::density::AtomTestConfig {
        density_lab::density::AtomTestConfig {
            level: self.level.unwrap_or(base.level),
            bootstrap: self.bootstrap.unwrap_or(base.bootstrap),
            relative_gap: self.relative_gap.unwrap_or(base.relative_gap),
            min_samples: self.min_samples.unwrap_or(base.min_samples),
            seed: base.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ensemble {
    pub solver: SolverConfig,
    #[serde(default)]
    pub u0: Vec<ModeValue>,
    pub forcing: ForcingSpec,
    pub subspace: Vec<ModeIndex>,
    pub members: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom: Option<AtomSettings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Continuity {
    pub solver: SolverConfig,
    #[serde(default)]
    pub u0: Vec<ModeValue>,
    pub direction: Vec<ModeValue>,
    pub deltas: Vec<f64>,
    pub forcing: ForcingSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_forcing: Option<ForcingSpec>,
    pub subspace: Vec<ModeIndex>,
    pub members: usize,
    pub baseline_replicates: usize,
    #[serde(default = "silverman")]
    pub bandwidth: Bandwidth,
    #[serde(default = "default_slack")]
    pub slack: f64,
}

fn silverman() -> Bandwidth {
    Bandwidth::Silverman
}

fn default_slack() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelProbe {
    pub source: NoiseSource,
    pub level: u32,
    pub samples: usize,
    pub cells: usize,
    pub min_occupancy: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom: Option<AtomSettings>,
    /// Acceptance expects atoms (a planted discrete law) or none.
    #[serde(default)]
    pub expect_atoms: bool,
}

/// A rejected parameter: dotted path plus reason.
#[derive(Debug, Clone, PartialEq)]
pub struct Invalid {
    pub path: String,
    pub reason: String,
}

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

type Check = Result<(), Invalid>;

fn bad(path: &str, reason: impl std::fmt::Display) -> Invalid {
    Invalid { path: path.to_string(), reason: reason.to_string() }
}

/// Runs a core validator and files its error under `path`.
fn under<T>(path: &str, r: density_lab::Result<T>) -> Result<T, Invalid> {
    r.map_err(|e| bad(path, e))
}

fn positive(path: &str, x: f64) -> Check {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(bad(path, format!("{x} must be positive and finite")))
    }
}

fn at_least(path: &str, n: usize, min: usize) -> Check {
    if n >= min {
        Ok(())
    } else {
        Err(bad(path, format!("{n} is below the minimum {min}")))
    }
}

fn check_wavelet(path: &str, w: WaveletKind) -> Check {
    under(path, WaveletFamily::from_kind(w)).map(|_| ())
}

fn check_law(path: &str, law: &NoiseLaw) -> Check {
    match law {
        NoiseLaw::Zero => Ok(()),
        NoiseLaw::Levy { spec, eps } => {
            under(&format!("{path}.spec"), spec.validate())?;
            positive(&format!("{path}.eps"), *eps)
        }
        NoiseLaw::Fbm { hurst } => under(&format!("{path}.hurst"), FbmSpec::new(*hurst, 0)).map(|_| ()),
    }
}

fn check_forcing(path: &str, f: &ForcingSpec, solver: &SolverConfig) -> Check {
    check_law(&format!("{path}.law"), &f.law)?;
    if !(f.amplitude >= 0.0 && f.amplitude.is_finite()) {
        return Err(bad(&format!("{path}.amplitude"), format!("{} must be finite and nonnegative", f.amplitude)));
    }
    let reach = f.mode_set().max_norm();
    if reach > solver.truncation as i32 {
        return Err(bad(&format!("{path}.sites"), format!("site norm {reach} beyond truncation {}", solver.truncation)));
    }
    Ok(())
}

fn check_modes(path: &str, truncation: u32, modes: &[ModeValue]) -> Result<SpectralVelocity, Invalid> {
    for (i, m) in modes.iter().enumerate() {
        if !m.value.is_finite() {
            return Err(bad(&format!("{path}[{i}].value"), "must be finite"));
        }
    }
    under(path, velocity(truncation, modes))
}

fn check_subspace(path: &str, modes: &[ModeIndex], truncation: u32) -> Result<ProjectionSubspace, Invalid> {
    let f = under(path, ProjectionSubspace::new(modes.to_vec()))?;
    under(path, f.check_within(truncation))?;
    Ok(f)
}

fn check_atom(path: &str, a: &Option<AtomSettings>) -> Check {
    let Some(a) = a else { return Ok(()) };
    if let Some(l) = a.level {
        if !(l > 0.0 && l < 1.0) {
            return Err(bad(&format!("{path}.level"), format!("{l} must lie in (0, 1)")));
        }
    }
    if let Some(b) = a.bootstrap {
        at_least(&format!("{path}.bootstrap"), b, 1)?;
    }
    if let Some(g) = a.relative_gap {
        positive(&format!("{path}.relative_gap"), g)?;
    }
    if let Some(m) = a.min_samples {
        at_least(&format!("{path}.min_samples"), m, 2)?;
    }
    Ok(())
}

impl SynthesizeLevy {
    fn validate(&self) -> Check {
        under("synthesize_levy.levy", self.levy.validate())?;
        positive("synthesize_levy.eps", self.eps)?;
        if self.max_level > MAX_FIELD_LEVEL {
            return Err(bad("synthesize_levy.max_level", format!("{} above {MAX_FIELD_LEVEL}", self.max_level)));
        }
        check_wavelet("synthesize_levy.wavelet", self.wavelet)?;
        at_least("synthesize_levy.samples", self.samples, 1)
    }
}

impl SynthesizeFbm {
    fn validate(&self) -> Check {
        under("synthesize_fbm.hurst", FbmSpec::new(self.hurst, 0))?;
        under("synthesize_fbm.max_level", FbmSpec::new(self.hurst, self.max_level))?;
        if self.covariance && self.max_level > MAX_COVARIANCE_LEVEL {
            return Err(bad("synthesize_fbm.covariance", format!("dense covariances stop at level {MAX_COVARIANCE_LEVEL}")));
        }
        at_least("synthesize_fbm.samples", self.samples, 1)
    }
}

impl CheckMoments {
    fn validate(&self) -> Check {
        under("check_moments.levy", self.levy.validate())?;
        check_wavelet("check_moments.wavelet", self.wavelet)?;
        if self.moments.is_none() && self.truncation.is_none() && self.small_ball.is_none() {
            return Err(bad("check_moments", "needs at least one of moments, truncation, small_ball"));
        }
        let alpha = self.levy.alpha;
        if let Some(m) = &self.moments {
            positive("check_moments.moments.eps", m.eps)?;
            if !(m.p > alpha && m.p < 2.0) {
                return Err(bad("check_moments.moments.p", format!("{} must lie in (alpha, 2) = ({alpha}, 2)", m.p)));
            }
            if m.max_level < FIT_MIN_LEVEL + 1 || m.max_level > MAX_FIELD_LEVEL {
                return Err(bad(
                    "check_moments.moments.max_level",
                    format!("{} outside [{}, {MAX_FIELD_LEVEL}]", m.max_level, FIT_MIN_LEVEL + 1),
                ));
            }
            at_least("check_moments.moments.samples", m.samples, MIN_SAMPLES)?;
        }
        if let Some(t) = &self.truncation {
            under("check_moments.truncation", BesovParams::new(t.s, t.p))?;
            if !(t.p < 2.0) {
                return Err(bad("check_moments.truncation.p", format!("{} must be below 2", t.p)));
            }
            if !(t.s < 1.0 / t.p - 1.0) {
                return Err(bad("check_moments.truncation.s", format!("{} must be below 1/p - 1 = {}", t.s, 1.0 / t.p - 1.0)));
            }
            for (i, e) in t.eps.iter().enumerate() {
                positive(&format!("check_moments.truncation.eps[{i}]"), *e)?;
            }
            let mut distinct = t.eps.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            if distinct.len() < 3 {
                return Err(bad("check_moments.truncation.eps", "needs at least three distinct levels"));
            }
            if t.max_level > MAX_FIELD_LEVEL {
                return Err(bad("check_moments.truncation.max_level", format!("{} above {MAX_FIELD_LEVEL}", t.max_level)));
            }
            at_least("check_moments.truncation.samples", t.samples, MIN_SAMPLES)?;
        }
        if let Some(b) = &self.small_ball {
            for (i, r) in b.radii.iter().enumerate() {
                positive(&format!("check_moments.small_ball.radii[{i}]"), *r)?;
            }
            let mut distinct = b.radii.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            if distinct.len() < 2 {
                return Err(bad("check_moments.small_ball.radii", "needs at least two distinct radii"));
            }
            at_least("check_moments.small_ball.samples", b.samples, MIN_SAMPLES)?;
            let s = &b.settings;
            at_least("check_moments.small_ball.settings.steps", s.steps, 1)?;
            at_least("check_moments.small_ball.settings.checkpoints", s.checkpoints, 3)?;
            at_least("check_moments.small_ball.settings.batches", s.batches, 2)?;
            positive("check_moments.small_ball.settings.small_jump_cutoff", s.small_jump_cutoff)?;
            if !(s.burn_in >= 0.0 && s.burn_in < 1.0) {
                return Err(bad("check_moments.small_ball.settings.burn_in", format!("{} must lie in [0, 1)", s.burn_in)));
            }
        }
        Ok(())
    }
}

impl Saturate {
    fn validate(&self) -> Check {
        if self.radius < 1 {
            return Err(bad("saturate.radius", format!("{} must be at least 1", self.radius)));
        }
        at_least("saturate.max_iters", self.max_iters, 1)
    }
}

fn check_solver(path: &str, s: &SolverConfig) -> Check {
    under(path, s.validate())
}

impl Simulate {
    fn validate(&self) -> Check {
        check_solver("simulate.solver", &self.solver)?;
        check_modes("simulate.u0", self.solver.truncation, &self.u0)?;
        check_forcing("simulate.forcing", &self.forcing, &self.solver)
    }
}

impl Ensemble {
    fn validate(&self) -> Check {
        check_solver("ensemble.solver", &self.solver)?;
        check_modes("ensemble.u0", self.solver.truncation, &self.u0)?;
        check_forcing("ensemble.forcing", &self.forcing, &self.solver)?;
        check_subspace("ensemble.subspace", &self.subspace, self.solver.truncation)?;
        at_least("ensemble.members", self.members, MIN_MEMBERS)?;
        check_atom("ensemble.atom", &self.atom)
    }
}

impl Continuity {
    fn validate(&self) -> Check {
        let n = self.solver.truncation;
        check_solver("continuity.solver", &self.solver)?;
        check_modes("continuity.u0", n, &self.u0)?;
        let w = check_modes("continuity.direction", n, &self.direction)?;
        if w.energy() == 0.0 {
            return Err(bad("continuity.direction", "perturbation direction is zero"));
        }
        if self.deltas.is_empty() {
            return Err(bad("continuity.deltas", "needs at least one delta"));
        }
        for (i, d) in self.deltas.iter().enumerate() {
            if !(d.is_finite() && *d >= 0.0) {
                return Err(bad(&format!("continuity.deltas[{i}]"), format!("{d} must be finite and nonnegative")));
            }
        }
        if self.deltas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(bad("continuity.deltas", "must be strictly decreasing"));
        }
        check_forcing("continuity.forcing", &self.forcing, &self.solver)?;
        if let Some(c) = &self.control_forcing {
            check_forcing("continuity.control_forcing", c, &self.solver)?;
        }
        let f = check_subspace("continuity.subspace", &self.subspace, n)?;
        at_least("continuity.members", self.members, MIN_MEMBERS)?;
        at_least("continuity.baseline_replicates", self.baseline_replicates, 2)?;
        if let Bandwidth::Explicit { h } = &self.bandwidth {
            if h.len() != f.dim() {
                return Err(bad("continuity.bandwidth.h", format!("{} entries for a {}-dimensional subspace", h.len(), f.dim())));
            }
            for (i, x) in h.iter().enumerate() {
                positive(&format!("continuity.bandwidth.h[{i}]"), *x)?;
            }
        }
        if !(self.slack >= 0.0 && self.slack.is_finite()) {
            return Err(bad("continuity.slack", format!("{} must be finite and nonnegative", self.slack)));
        }
        Ok(())
    }

    pub fn to_core(&self) -> density_lab::Result<density_lab::density::ContinuityConfig> {
        let n = self.solver.truncation;
        Ok(density_lab::density::ContinuityConfig {
            solver: self.solver,
            forcing: self.forcing.clone(),
            u0: velocity(n, &self.u0)?,
            direction: velocity(n, &self.direction)?,
            deltas: self.deltas.clone(),
            subspace: ProjectionSubspace::new(self.subspace.clone())?,
            members: self.members,
            baseline_replicates: self.baseline_replicates,
            control_forcing: self.control_forcing.clone(),
            bandwidth: self.bandwidth.clone(),
            slack: self.slack,
        })
    }
}

impl KernelProbe {
    fn validate(&self) -> Check {
        match self.source {
            NoiseSource::Fbm { hurst } => {
                under("kernel_probe.source.hurst", FbmSpec::new(hurst, self.level.min(MAX_PROBE_LEVEL)))?;
            }
            NoiseSource::Levy { spec, eps } => {
                under("kernel_probe.source.spec", spec.validate())?;
                positive("kernel_probe.source.eps", eps)?;
            }
            NoiseSource::TwoPoint { rate, size } => {
                positive("kernel_probe.source.rate", rate)?;
                positive("kernel_probe.source.size", size)?;
            }
        }
        if self.level > MAX_PROBE_LEVEL {
            return Err(bad("kernel_probe.level", format!("{} above {MAX_PROBE_LEVEL}", self.level)));
        }
        at_least("kernel_probe.cells", self.cells, 1)?;
        at_least("kernel_probe.samples", self.samples, self.cells)?;
        check_atom("kernel_probe.atom", &self.atom)
    }
}

impl ExperimentConfig {
    /// Every precondition the pipelines would check, before any work starts.
    pub fn validate(&self) -> Check {
        let present: Vec<&str> = [
            (self.synthesize_levy.is_some(), "synthesize_levy"),
            (self.synthesize_fbm.is_some(), "synthesize_fbm"),
            (self.check_moments.is_some(), "check_moments"),
            (self.saturate.is_some(), "saturate"),
            (self.simulate.is_some(), "simulate"),
            (self.ensemble.is_some(), "ensemble"),
            (self.continuity.is_some(), "continuity"),
            (self.kernel_probe.is_some(), "kernel_probe"),
        ]
        .iter()
        .filter(|p| p.0)
        .map(|p| p.1)
        .collect();
        let want = self.kind.name();
        if let Some(other) = present.iter().find(|p| **p != want) {
            return Err(bad(other, format!("table does not belong to kind {want}")));
        }
        if present.is_empty() {
            return Err(bad(want, "missing table for the selected kind"));
        }
        match self.kind {
            Kind::SynthesizeLevy => self.synthesize_levy.as_ref().unwrap().validate(),
            Kind::SynthesizeFbm => self.synthesize_fbm.as_ref().unwrap().validate(),
            Kind::CheckMoments => self.check_moments.as_ref().unwrap().validate(),
            Kind::Saturate => self.saturate.as_ref().unwrap().validate(),
            Kind::Simulate => self.simulate.as_ref().unwrap().validate(),
            Kind::Ensemble => self.ensemble.as_ref().unwrap().validate(),
            Kind::Continuity => self.continuity.as_ref().unwrap().validate(),
            Kind::KernelProbe => self.kernel_probe.as_ref().unwrap().validate(),
        }
    }

    /// Hash of everything except the output location.
    pub fn hash(&self) -> density_lab::Result<String> {
        let mut c = self.clone();
        c.output = PathBuf::new();
        density_lab::density::config_hash(&c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Parses TOML, reporting the dotted path of the offending key.
pub fn parse(text: &str) -> Result<ExperimentConfig, Invalid> {
    let de = toml::Deserializer::parse(text).map_err(|e| bad("<document>", e.message()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<root>".to_string() } else { path };
        bad(&path, e.inner().message())
    })
}

pub fn load(path: &Path) -> Result<ExperimentConfig, Invalid> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(&path.display().to_string(), e))?;
    parse(&text)
}
