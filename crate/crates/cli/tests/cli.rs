use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use density_lab_cli::Manifest;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_density-lab"));
    c.env_remove("DENSITY_LAB_OUTPUT").env_remove("DENSITY_LAB_THREADS");
    c
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run(config: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg(config).args(extra).output().unwrap()
}

const SATURATE: &str = r#"
kind = "saturate"
base_seed = 0
output = "OUT"

[saturate]
sites = [[1, 0], [0, 1], [1, 1], [1, -1]]
radius = 8
"#;

fn with_output(template: &str, out: &Path) -> String {
    template.replace("OUT", &out.display().to_string())
}

#[test]
fn missing_field_names_its_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        r#"
kind = "check_moments"
base_seed = 1
output = "x"
[check_moments]
levy = { alpha = 1.5, amplitude = 1.0 }
[check_moments.moments]
p = 1.8
max_level = 6
samples = 200
"#,
    );
    for sub in ["validate", "run"] {
        let o = bin().arg(sub).arg(&cfg).output().unwrap();
        assert_eq!(code(&o), 1);
        let e = stderr(&o);
        assert!(e.contains("check_moments.moments") && e.contains("missing field `eps`"), "{e}");
    }
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn unknown_keys_and_bad_values_are_rejected_before_work() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let typo = write(tmp.path(), "a.toml", &with_output(SATURATE, &out).replace("radius = 8", "radius = 8\nradus = 3"));
    let o = run(&typo, &[]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("saturate.radus"), "{}", stderr(&o));
    let zero = write(tmp.path(), "b.toml", &with_output(SATURATE, &out).replace("radius = 8", "radius = 0"));
    let o = run(&zero, &[]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("saturate.radius"));
    assert!(!out.exists());
}

/// Closure of a symmetric set under `m + n` for `|m| != |n|`, `m x n != 0`,
/// by direct iteration over all pairs.
fn brute_sizes(gen: &[(i32, i32)], steps: usize) -> Vec<usize> {
    let mut k: HashSet<(i32, i32)> = gen.iter().flat_map(|&(a, b)| [(a, b), (-a, -b)]).collect();
    k.insert((0, 0));
    let mut sizes = vec![k.len()];
    for _ in 0..steps {
        let cur: Vec<(i32, i32)> = k.iter().copied().collect();
        for m in &cur {
            for n in &cur {
                if m.0 * m.0 + m.1 * m.1 != n.0 * n.0 + n.1 * n.1 && m.0 * n.1 - m.1 * n.0 != 0 {
                    k.insert((m.0 + n.0, m.1 + n.1));
                }
            }
        }
        sizes.push(k.len());
    }
    sizes
}

#[test]
fn saturate_lists_closure_sizes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sat");
    let cfg = write(tmp.path(), "s.toml", &with_output(SATURATE, &out));
    let o = run(&cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("saturation.ndjson")).unwrap();
    let sizes: Vec<usize> = text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["size"].as_u64().unwrap() as usize)
        .collect();
    assert_eq!(sizes, brute_sizes(&[(1, 0), (0, 1), (1, 1), (1, -1)], sizes.len() - 1));
    let m = Manifest::read(&out).unwrap();
    assert!(m.passed());
    assert_eq!(m.base_seed, 0);
    assert_eq!(m.config_hash.len(), 64);
}

#[test]
fn strict_turns_failed_checks_into_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("line");
    // a collinear generator never leaves its line
    let cfg = write(
        tmp.path(),
        "l.toml",
        &with_output(SATURATE, &out).replace("[[1, 0], [0, 1], [1, 1], [1, -1]]", "[[1, 1], [2, 2]]").replace("radius = 8", "radius = 3"),
    );
    assert_eq!(code(&run(&cfg, &[])), 0);
    let o = run(&cfg, &["--strict"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("window coverage"));
    assert!(!Manifest::read(&out).unwrap().passed());
    let ok = write(tmp.path(), "ok.toml", &std::fs::read_to_string(&cfg).unwrap().replace("radius = 3", "radius = 3\nexpect_covered = false"));
    assert_eq!(code(&run(&ok, &["--strict"])), 0);
}

const SIMULATE: &str = r#"
kind = "simulate"
base_seed = 5
output = "OUT"

[simulate.solver]
viscosity = 0.1
truncation = 4
dt = 0.01
steps = 100
scheme = "SCHEME"

[[simulate.u0]]
j1 = 2
j2 = 1
parity = "cos"
value = 1.5

[simulate.forcing]
sites = [[1, 0], [0, 1]]
law = { kind = "zero" }
"#;

fn energies(dir: &Path) -> Vec<(f64, f64)> {
    std::fs::read_to_string(dir.join("energy.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (v[0], v[1])
        })
        .collect()
}

#[test]
fn zero_noise_single_mode_energy_decays_analytically() {
    let tmp = tempfile::tempdir().unwrap();
    // one mode: the nonlinearity vanishes and E(t) = E0 exp(-2 kappa |j|^2 t)
    let (kappa, lam, e0) = (0.1, 5.0, 2.25);
    let out = tmp.path().join("if");
    let cfg = write(tmp.path(), "a.toml", &with_output(SIMULATE, &out).replace("SCHEME", "integrating_factor_euler"));
    assert_eq!(code(&run(&cfg, &[])), 0);
    let e = energies(&out);
    assert_eq!(e.len(), 101);
    for (t, en) in &e {
        let exact = e0 * (-2.0 * kappa * lam * t).exp();
        assert!((en - exact).abs() <= 1e-12 * exact, "t {t}: {en} vs {exact}");
    }
    // implicit Euler damps by (1 + kappa lam dt)^-1 per step: first order in dt
    let out = tmp.path().join("imex");
    let cfg = write(tmp.path(), "b.toml", &with_output(SIMULATE, &out).replace("SCHEME", "imex_euler"));
    assert_eq!(code(&run(&cfg, &[])), 0);
    for (i, (t, en)) in energies(&out).iter().enumerate() {
        let exact = e0 * (-2.0 * kappa * lam * t).exp();
        let scheme = e0 * (1.0 + kappa * lam * 0.01f64).powi(-2 * i as i32);
        assert!((en - scheme).abs() <= 1e-12 * scheme);
        assert!((en - exact).abs() <= 2.0 * kappa * lam * 0.01 * exact);
    }
}

#[test]
fn divergence_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("blow");
    let text = with_output(SIMULATE, &out).replace("SCHEME", "imex_euler").replace("value = 1.5", "value = 1e150")
        + "\n[[simulate.u0]]\nj1 = 1\nj2 = 0\nparity = \"sin\"\nvalue = 1e150\n";
    let cfg = write(tmp.path(), "d.toml", &text);
    let o = run(&cfg, &[]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("divergence"));
}

const FBM: &str = r#"
kind = "synthesize_fbm"
base_seed = 7
output = "OUT"

[synthesize_fbm]
hurst = 0.7
max_level = 6
samples = 3
covariance = true
"#;

#[test]
fn manifest_alone_reproduces_the_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let cfg = write(tmp.path(), "f.toml", &with_output(FBM, &a));
    assert_eq!(code(&run(&cfg, &[])), 0);
    let b = tmp.path().join("b");
    let o = run(&a.join("manifest.json"), &["--output", b.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (ma, mb) = (Manifest::read(&a).unwrap(), Manifest::read(&b).unwrap());
    assert_eq!(ma.config_hash, mb.config_hash);
    assert_eq!(ma.artifacts, mb.artifacts);
    assert!(ma.artifacts.contains(&"covariance_06.csv".to_string()));
    for name in &ma.artifacts {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    assert!(ma.passed(), "{:?}", ma.verdicts);
}

#[test]
fn environment_overrides_output_and_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "f.toml", &with_output(FBM, &tmp.path().join("configured")));
    let target = tmp.path().join("from_env");
    let o = bin()
        .arg("run")
        .arg(&cfg)
        .env("DENSITY_LAB_OUTPUT", &target)
        .env("DENSITY_LAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(!tmp.path().join("configured").exists());
    let m = Manifest::read(&target).unwrap();
    assert_eq!(m.threads, 2);
    let o = bin().arg("run").arg(&cfg).env("DENSITY_LAB_THREADS", "0").output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn report_writes_tables_and_plot_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fbm");
    let cfg = write(tmp.path(), "f.toml", &with_output(FBM, &out));
    assert_eq!(code(&run(&cfg, &[])), 0);
    let o = bin().arg("report").arg(&out).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("| slope - 1 | target exponent |"));
    let plot = std::fs::read_to_string(out.join("report/fbm_variance.csv")).unwrap();
    let lines: Vec<&str> = plot.lines().collect();
    assert_eq!(lines[0], "x,y,band");
    assert_eq!(lines.len(), 1 + 7);
    assert!(out.join("report/summary.md").is_file());

    // a vanished artifact is named
    std::fs::remove_file(out.join("field_0001.ndjson")).unwrap();
    let o = bin().arg("report").arg(&out).output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("field_0001.ndjson"));
}

#[test]
fn report_on_empty_directory_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin().arg("report").arg(tmp.path()).output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("manifest.json"));
}

#[test]
fn moments_report_has_slope_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("mom");
    let text = format!(
        r#"
kind = "check_moments"
base_seed = 3
output = "{}"
[check_moments]
levy = {{ alpha = 1.5, amplitude = 1.0, cutoff = 1.0 }}
[check_moments.moments]
eps = 0.05
p = 1.8
max_level = 6
samples = 400
"#,
        out.display()
    );
    let cfg = write(tmp.path(), "m.toml", &text);
    assert_eq!(code(&run(&cfg, &[])), 0);
    let o = bin().arg("report").arg(&out).output().unwrap();
    let s = stdout(&o);
    assert!(s.contains("| slope | stderr | target exponent | tolerance | verdict |"), "{s}");
    assert!(s.contains("| -0.1000 | 0.15 |"));
    let plot = std::fs::read_to_string(out.join("report/moments.csv")).unwrap();
    assert_eq!(plot.lines().count(), 1 + 7);
}

#[test]
fn continuity_report_states_the_trend_verdict() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cont");
    let text = format!(
        r#"
kind = "continuity"
base_seed = 1
output = "{}"
[continuity]
deltas = [0.5, 0.25, 0.0]
members = 100
baseline_replicates = 3
subspace = [{{ j1 = 2, j2 = 1, parity = "cos" }}]
direction = [{{ j1 = 1, j2 = 0, parity = "sin", value = 3.0 }}]
[continuity.solver]
viscosity = 0.1
truncation = 4
dt = 2e-3
steps = 50
[continuity.forcing]
sites = [[1, 0], [0, 1], [1, 1], [1, -1]]
amplitude = 0.1
law = {{ kind = "levy", spec = {{ alpha = 1.5, amplitude = 1.0, cutoff = 1.0 }}, eps = 0.05 }}
"#,
        out.display()
    );
    let cfg = write(tmp.path(), "c.toml", &text);
    let o = run(&cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = bin().arg("report").arg(&out).output().unwrap();
    let s = stdout(&o);
    assert!(s.lines().any(|l| l.starts_with("monotone trend: ")), "{s}");
    let plot = std::fs::read_to_string(out.join("report/continuity.csv")).unwrap();
    assert_eq!(plot.lines().count(), 1 + 3);
}

#[test]
fn sample_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let o = bin().arg("validate").arg(&p).output().unwrap();
            assert_eq!(code(&o), 0, "{}: {}", p.display(), stderr(&o));
            seen += 1;
        }
    }
    assert_eq!(seen, 8);
}
