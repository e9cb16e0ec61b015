//! Human-readable summaries and plot-ready `(x, y, band)` CSVs from a run
//! directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use density_lab::density::{AtomReport, ContinuityReport, ProbeReport};
use density_lab::levy::{MomentReport, SmallBallReport, TruncationReport};
use density_lab::torus::SaturationReport;
use serde::de::DeserializeOwned;

use crate::config::Kind;
use crate::run::{FbmVariance, LevelEnergy, Manifest, Failure, MANIFEST};

pub const REPORT_DIR: &str = "report";

/// Everything `report` produced: the summary text and the files written.
#[derive(Debug, Clone)]
pub struct Summary {
    pub text: String,
    pub files: Vec<PathBuf>,
}

struct Plot {
    name: String,
    rows: Vec<(f64, f64, f64)>,
}

fn read_json<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<T, Failure> {
    let path = dir.join(name);
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn pass(ok: bool) -> &'static str {
    if ok { "PASS" } else { "FAIL" }
}

fn moments_section(r: &MomentReport, s: &mut String, plots: &mut Vec<Plot>) {
    let _ = writeln!(s, "\n## Levy coefficient moments (p = {}, eps = {}, M = {})\n", r.p, r.eps, r.samples);
    let _ = writeln!(s, "| j | E abs(zeta)^p | stderr |\n|---|---|---|");
    let ln2 = std::f64::consts::LN_2;
    let mut rows = vec![];
    for l in &r.levels {
        let _ = writeln!(s, "| {} | {:.6e} | {:.2e} |", l.j, l.value, l.stderr);
        if l.value > 0.0 {
            rows.push((l.j as f64, l.value.log2(), 1.96 * l.stderr / (l.value * ln2)));
        }
    }
    match &r.fit {
        Some(f) => {
            let ok = (f.slope - r.target_slope).abs() <= crate::run::MOMENT_SLOPE_TOL;
            let _ = writeln!(
                s,
                "\n| slope | stderr | target exponent | tolerance | verdict |\n|---|---|---|---|---|\n| {:.4} | {:.4} | {:.4} | {} | {} |",
                f.slope,
                f.stderr,
                r.target_slope,
                crate::run::MOMENT_SLOPE_TOL,
                pass(ok)
            );
        }
        None => {
            let _ = writeln!(s, "\nno fit: moments vanish");
        }
    }
    plots.push(Plot { name: "moments.csv".into(), rows });
}

fn truncation_section(r: &TruncationReport, s: &mut String, plots: &mut Vec<Plot>) {
    let _ = writeln!(s, "\n## Truncation convergence (p = {}, s = {}, M = {})\n", r.p, r.s, r.samples);
    let _ = writeln!(s, "| eps_hi | eps_lo | E norm^p | stderr |\n|---|---|---|---|");
    let mut rows = vec![];
    for p in &r.points {
        let _ = writeln!(s, "| {} | {} | {:.6e} | {:.2e} |", p.eps_hi, p.eps_lo, p.mean, p.stderr);
        rows.push((p.eps_lo.ln(), p.mean.ln(), 1.96 * p.stderr / p.mean));
    }
    let floor = r.target_slope - crate::run::TRUNCATION_SLOPE_SLACK;
    let _ = writeln!(
        s,
        "\n| slope | stderr | target exponent | required | verdict |\n|---|---|---|---|---|\n| {:.4} | {:.4} | {:.4} | >= {:.4} | {} |",
        r.fit.slope,
        r.fit.stderr,
        r.target_slope,
        floor,
        pass(r.fit.slope >= floor)
    );
    plots.push(Plot { name: "truncation.csv".into(), rows });
}

fn small_ball_section(r: &SmallBallReport, s: &mut String, plots: &mut Vec<Plot>) {
    let _ = writeln!(s, "\n## Small-ball probabilities (alpha = {}, M = {})\n", r.spec.alpha, r.samples);
    let _ = writeln!(s, "| eps | hits | P | decay rate | censored |\n|---|---|---|---|---|");
    let mut rows = vec![];
    let m = r.samples as f64;
    for p in &r.points {
        let rate = p.decay_rate.map_or("-".to_string(), |d| format!("{d:.4}"));
        let _ = writeln!(s, "| {} | {} | {:.4e} | {} | {} |", p.eps, p.hits, p.probability, rate, p.censored);
        let q = p.probability;
        if q > 0.0 && q < 1.0 {
            // delta method on ln(-ln P)
            let sd = (q * (1.0 - q) / m).sqrt();
            rows.push((p.eps.ln(), (-q.ln()).ln(), 1.96 * sd / (q * q.ln().abs())));
        }
    }
    let ok = (r.alpha_hat - r.spec.alpha).abs() <= crate::run::SMALL_BALL_TOL;
    let _ = writeln!(
        s,
        "\n| alpha_hat | stderr | target exponent | tolerance | verdict |\n|---|---|---|---|---|\n| {:.4} | {:.4} | {} | {} | {} |",
        r.alpha_hat,
        r.alpha_stderr,
        r.spec.alpha,
        crate::run::SMALL_BALL_TOL,
        pass(ok)
    );
    plots.push(Plot { name: "small_ball.csv".into(), rows });
}

fn fbm_section(v: &FbmVariance, s: &mut String, plots: &mut Vec<Plot>) {
    let _ = writeln!(s, "\n## fBm coefficient variance (H = {})\n", v.hurst);
    let _ = writeln!(s, "| j | Var zeta_jk |\n|---|---|");
    let mut rows = vec![];
    for (j, var) in &v.levels {
        let _ = writeln!(s, "| {j} | {var:.8e} |");
        rows.push((*j as f64, var.log2(), 0.0));
    }
    if let Some(f) = &v.fit {
        let slope = f.slope - 1.0;
        let ok = (slope - v.target_slope).abs() <= crate::run::FBM_VARIANCE_TOL;
        let _ = writeln!(
            s,
            "\n| slope - 1 | target exponent | tolerance | verdict |\n|---|---|---|---|\n| {slope:.4} | {:.4} | {} | {} |",
            v.target_slope,
            crate::run::FBM_VARIANCE_TOL,
            pass(ok)
        );
    }
    plots.push(Plot { name: "fbm_variance.csv".into(), rows });
}

fn level_section(title: &str, levels: &[LevelEnergy], s: &mut String) {
    let _ = writeln!(s, "\n## {title}\n\n| j | mean sum_k zeta_jk^2 |\n|---|---|");
    for l in levels {
        let _ = writeln!(s, "| {} | {:.6e} |", l.j, l.mean_square_sum);
    }
}

fn saturation_section(r: &SaturationReport, s: &mut String) {
    let _ = writeln!(s, "\n## Saturation (window radius {})\n\n| i | size of K^i | new |\n|---|---|---|", r.radius);
    for h in &r.history {
        let _ = writeln!(s, "| {} | {} | {} |", h.i, h.size, h.newly_added);
    }
    let _ = writeln!(
        s,
        "\ncovered: {}; fixpoint: {}; window sites missing: {}",
        r.covered,
        r.fixpoint,
        r.missing.len()
    );
}

fn atom_table(r: &AtomReport, s: &mut String) {
    let _ = writeln!(
        s,
        "| samples | repeated rows | marginal repeats | near-duplicates | null quantile | p | verdict |\n|---|---|---|---|---|---|---|\n| {} | {} | {} | {} | {:.1} | {:.4} | {:?} |",
        r.samples, r.max_multiplicity, r.max_marginal_multiplicity, r.nn_statistic, r.null_quantile, r.p_value, r.verdict
    );
}

fn continuity_section(r: &ContinuityReport, s: &mut String, plots: &mut Vec<Plot>) {
    let _ = writeln!(s, "\n## Continuity in the initial condition\n");
    let _ = writeln!(s, "| delta | L1 distance | control distance |\n|---|---|---|");
    let band = 3.0 * r.floor_sd;
    let mut rows = vec![];
    let mut control = vec![];
    for p in &r.points {
        let c = p.control_distance.map_or("-".to_string(), |d| format!("{d:.4}"));
        let _ = writeln!(s, "| {} | {:.4} | {c} |", p.delta, p.distance);
        rows.push((p.delta, p.distance, band));
        if let Some(d) = p.control_distance {
            control.push((p.delta, d, band));
        }
    }
    let _ = writeln!(s, "\nnoise floor {:.4} +- {:.4} over {} replicates", r.floor_mean, r.floor_sd, r.baseline.len());
    let verdict = r.nonincreasing && r.reaches_floor;
    let _ = writeln!(
        s,
        "monotone trend: {} (nonincreasing {}, reaches floor {}, trend {:+.2})",
        pass(verdict),
        r.nonincreasing,
        r.reaches_floor,
        r.trend
    );
    if let Some(c) = r.control_persists {
        let _ = writeln!(s, "negative control persists: {}", pass(c));
    }
    plots.push(Plot { name: "continuity.csv".into(), rows });
    if !control.is_empty() {
        plots.push(Plot { name: "continuity_control.csv".into(), rows: control });
    }
}

fn probe_section(r: &ProbeReport, s: &mut String) {
    let _ = writeln!(s, "\n## Conditional kernel probe (level {}, {} draws)\n", r.level, r.samples);
    let _ = writeln!(s, "| cell | gamma range | members | p | verdict |\n|---|---|---|---|---|");
    for c in &r.cells {
        let (p, v) = match &c.report {
            Some(a) => (format!("{:.4}", a.p_value), format!("{:?}", a.verdict)),
            None => ("-".into(), "skipped".into()),
        };
        let _ = writeln!(s, "| {} | [{:.4}, {:.4}] | {} | {p} | {v} |", c.cell, c.gamma_lo, c.gamma_hi, c.members);
    }
    let _ = writeln!(s, "\ncells with atoms: {} of {} tested", r.atoms_detected, r.tested());
}

fn energy_section(dir: &Path, s: &mut String) -> Result<(), Failure> {
    let text = std::fs::read_to_string(dir.join("energy.csv"))?;
    let rows: Vec<&str> = text.lines().skip(1).collect();
    let field = |line: &str, i: usize| line.split(',').nth(i).unwrap_or("?").to_string();
    let _ = writeln!(s, "\n## Trajectory\n\n| | t | energy | enstrophy |\n|---|---|---|---|");
    if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
        let _ = writeln!(s, "| start | {} | {} | {} |", field(first, 0), field(first, 1), field(first, 2));
        let _ = writeln!(s, "| end | {} | {} | {} |", field(last, 0), field(last, 1), field(last, 2));
    }
    Ok(())
}

/// Reads the manifest and artifacts in `dir`, writes `dir/report/` and
/// returns the summary.
pub fn report(dir: &Path) -> Result<Summary, Failure> {
    if !dir.join(MANIFEST).is_file() {
        return Err(Failure::Invalid(format!("{}: missing {MANIFEST}", dir.display())));
    }
    let m = Manifest::read(dir)?;
    let absent: Vec<&str> = m.artifacts.iter().filter(|a| !dir.join(a).is_file()).map(|a| a.as_str()).collect();
    if !absent.is_empty() {
        return Err(Failure::Invalid(format!("{}: missing artifacts {}", dir.display(), absent.join(", "))));
    }
    let mut s = String::new();
    let _ = writeln!(s, "# {} run\n", m.kind.name());
    let _ = writeln!(
        s,
        "config hash {}\nbase seed {}\nversions density-lab {} / cli {}\nthreads {}, wall time {:.2} s",
        m.config_hash, m.base_seed, m.versions.density_lab, m.versions.density_lab_cli, m.threads, m.wall_time_s
    );
    if !m.verdicts.is_empty() {
        let _ = writeln!(s, "\n| check | detail | verdict |\n|---|---|---|");
        for v in &m.verdicts {
            let _ = writeln!(s, "| {} | {} | {} |", v.check, v.detail, pass(v.passed));
        }
    }
    let has = |name: &str| m.artifacts.iter().any(|a| a == name);
    let mut plots = vec![];
    match m.kind {
        Kind::SynthesizeLevy => level_section("Levy coefficient energy per level", &read_json::<Vec<LevelEnergy>>(dir, "levels.json")?, &mut s),
        Kind::SynthesizeFbm => {
            level_section("fBm coefficient energy per level", &read_json::<Vec<LevelEnergy>>(dir, "levels.json")?, &mut s);
            fbm_section(&read_json(dir, "variance.json")?, &mut s, &mut plots);
        }
        Kind::CheckMoments => {
            if has("moments.json") {
                moments_section(&read_json(dir, "moments.json")?, &mut s, &mut plots);
            }
            if has("truncation.json") {
                truncation_section(&read_json(dir, "truncation.json")?, &mut s, &mut plots);
            }
            if has("small_ball.json") {
                small_ball_section(&read_json(dir, "small_ball.json")?, &mut s, &mut plots);
            }
        }
        Kind::Saturate => saturation_section(&read_json(dir, "saturation.json")?, &mut s),
        Kind::Simulate => energy_section(dir, &mut s)?,
        Kind::Ensemble => {
            let _ = writeln!(s, "\n## Atom test on the projected ensemble\n");
            atom_table(&read_json(dir, "atoms.json")?, &mut s);
        }
        Kind::Continuity => continuity_section(&read_json(dir, "continuity.json")?, &mut s, &mut plots),
        Kind::KernelProbe => probe_section(&read_json(dir, "probe.json")?, &mut s),
    }

    let out = dir.join(REPORT_DIR);
    std::fs::create_dir_all(&out)?;
    let mut files = vec![];
    for p in &plots {
        let mut csv = String::from("x,y,band\n");
        for (x, y, b) in &p.rows {
            let _ = writeln!(csv, "{x:e},{y:e},{b:e}");
        }
        let path = out.join(&p.name);
        std::fs::write(&path, csv)?;
        files.push(path);
    }
    let path = out.join("summary.md");
    std::fs::write(&path, &s)?;
    files.push(path);
    Ok(Summary { text: s, files })
}
