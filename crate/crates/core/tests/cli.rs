use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use oldroyd_galerkin::cli::{
    emit_config, parse_config, AnalyticForcing, ForcingSection, InitialSection, RunConfig,
};
use oldroyd_galerkin::dynamics::Scheme;
use proptest::prelude::*;

const BASE: &str = "\
[params]
reynolds = 1.0
weissenberg = 1.0
retardation = 0.5

[discretization]
k_max = 2

[solver]
t_final = 1.0
dt = 0.001
";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_oldroyd"));
    c.env_remove("OLDROYD_OUTPUT_DIR");
    c
}

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, format!("{BASE}{extra}")).unwrap();
    p
}

fn run(dir: &Path, extra: &str, args: &[&str]) -> Output {
    let cfg = write_config(dir, extra);
    bin()
        .args(args)
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/summary.json")).unwrap()).unwrap()
}

#[test]
fn rest_preset_gives_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "", &["simulate", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/trajectory.csv"));
    assert_eq!(&header[..4], ["t", "kinetic", "stress_energy", "viscous_rate"]);
    assert_eq!(header.len(), 4 + 4 + 12);
    assert_eq!(header[4], "a_1");
    assert_eq!(header.last().unwrap(), "b_12");
    assert_eq!(rows.len(), 1001);
    for r in &rows {
        assert!(r[1..].iter().all(|x| x.parse::<f64>().unwrap() == 0.0));
    }
    let s = summary(dir.path());
    assert_eq!(s["seed"], 9);
    let checks = s["checks"].as_object().unwrap();
    assert_eq!(checks.len(), 6);
    assert!(checks.values().all(|v| v == "skipped"));
    let echo = parse_config(s["config_toml"].as_str().unwrap()).unwrap();
    assert_eq!(echo.seed, 9);
}

#[test]
fn csv_numbers_are_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "[initial]\nkind = \"single_mode\"\nmode = 2\namplitude = 0.3\n",
        &["simulate", "--t-final", "0.01"],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("out/trajectory.csv")).unwrap();
    for field in text.lines().skip(1).flat_map(|l| l.split(',')) {
        let (mantissa, exp) = field.split_once('e').unwrap();
        let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
        assert_eq!(digits.len(), 17, "{field}");
        exp.parse::<i32>().unwrap();
    }
}

#[test]
fn isotropic_relaxation_energy() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "[initial]\nkind = \"isotropic_stress\"\nc = 1.0\n",
        &["simulate", "--output-stride", "10"],
    );
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = read_csv(&dir.path().join("out/trajectory.csv"));
    let t = column(&h, &rows, "t");
    let e = column(&h, &rows, "stress_energy");
    assert_eq!(t.len(), 101);
    for (t, e) in t.iter().zip(&e) {
        assert!((e - (-2.0 * t).exp()).abs() < 1e-5, "t = {t}: {e}");
    }
}

#[test]
fn energy_check_stride_refinement() {
    let dir = tempfile::tempdir().unwrap();
    let extra = "[forcing]\nkind = \"manufactured\"\n\n[study]\nenergy_tolerance = 1e-4\n";
    let out = run(dir.path(), extra, &["energy-check", "--k-max", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&dir.path().join("out/energy.csv"));
    assert_eq!(h.len(), 8);
    let r1 = column(&h, &rows, "residual")
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let s = summary(dir.path());
    assert_eq!(s["checks"]["energy"], "pass");

    let out = run(dir.path(), extra, &["energy-check", "--k-max", "4", "--output-stride", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = read_csv(&dir.path().join("out/energy.csv"));
    let r2 = column(&h, &rows, "residual")
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let ratio = r2 / r1;
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
}

#[test]
fn bad_retardation_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    fs::write(&p, BASE.replace("retardation = 0.5", "retardation = 1.5")).unwrap();
    let out = bin().arg("simulate").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0 < a < 1"));
}

#[test]
fn zero_dt_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "", &["simulate", "--dt", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn syntax_error_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    fs::write(&p, "[params\nreynolds = 1.0\n").unwrap();
    let out = bin().arg("simulate").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn blow_up_is_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "[initial]\nkind = \"single_mode\"\nmode = 1\namplitude = 1.0\n",
        &["simulate", "--k-max", "4", "--dt", "0.5", "--t-final", "200"],
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("instability"));
}

#[test]
fn output_dir_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("[output]\ndir = {:?}\n", dir.path().join("from_file")),
    );
    let common = ["--t-final", "0.01"];
    let status = bin().arg("simulate").arg(&cfg).args(common).status().unwrap();
    assert!(status.success());
    assert!(dir.path().join("from_file/summary.json").exists());

    let status = bin()
        .arg("simulate")
        .arg(&cfg)
        .args(common)
        .env("OLDROYD_OUTPUT_DIR", dir.path().join("from_env"))
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("from_env/summary.json").exists());

    let status = bin()
        .arg("simulate")
        .arg(&cfg)
        .args(common)
        .env("OLDROYD_OUTPUT_DIR", dir.path().join("from_env2"))
        .arg("--out")
        .arg(dir.path().join("from_flag"))
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("from_flag/summary.json").exists());
    assert!(!dir.path().join("from_env2").exists());
}

#[test]
fn stability_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "[initial]\nkind = \"single_mode\"\nmode = 2\namplitude = 1.0\n",
        &["stability", "--t-final", "0.3", "--output-stride", "10"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&dir.path().join("out/stability.csv"));
    assert_eq!(&h[..4], ["t", "delta", "gronwall_bound", "xi"]);
    assert_eq!(rows.len(), 31);
    let s = summary(dir.path());
    assert_eq!(s["checks"]["stability"], "pass");
    assert_eq!(s["checks"]["stability_scaling"], "pass");
    assert!(s["details"]["fitted_c"].is_number());
}

#[test]
fn ladyzhenskaya_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "", &["ladyzhenskaya", "--seed", "3", "--samples", "30", "--k-max", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = read_csv(&dir.path().join("out/ratios.csv"));
    assert_eq!(h[5], "ratio");
    assert_eq!(rows.len(), 30);
    assert!(rows.iter().all(|r| r[6] == "pass"));
    assert_eq!(summary(dir.path())["checks"]["ladyzhenskaya"], "pass");
}

#[test]
fn ladyzhenskaya_on_torus_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "[domain]\nmode = \"periodic_torus\"\n",
        &["ladyzhenskaya", "--samples", "3"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn converge_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "[initial]\nkind = \"single_mode\"\nmode = 2\namplitude = 2.0\n",
        &[
            "converge",
            "--t-final",
            "0.2",
            "--dt",
            "0.002",
            "--k-list",
            "1,2,4",
            "--dt-list",
            "0.02,0.01,0.005,0.0025",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&dir.path().join("out/convergence.csv"));
    assert_eq!(h[0], "kind");
    assert_eq!(rows.len(), 3 + 4);
    let s = summary(dir.path());
    assert_eq!(s["checks"]["convergence_spatial"], "pass");
    assert_eq!(s["checks"]["convergence_temporal"], "pass");
}

#[test]
fn help_documents_grammar() {
    let out = bin().arg("--help").output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    for s in ["simulate", "energy-check", "stability", "ladyzhenskaya", "converge", "[params]", "OLDROYD_OUTPUT_DIR"] {
        assert!(text.contains(s), "missing {s}");
    }
}

fn arb_config() -> impl Strategy<Value = RunConfig> {
    (
        any::<u64>(),
        (1e-3f64..1e3, 1e-3f64..1e3, 1e-6f64..0.999_999),
        1usize..6,
        prop::option::of(2usize..60),
        (1e-3f64..10.0, 1e-5f64..1e-2, 0usize..3, 1usize..50),
        0usize..4,
        0usize..4,
        -10.0f64..10.0,
    )
        .prop_map(|(seed, (re, we, a), k, q, (t, dt, sch, stride), ik, fk, amp)| {
            let mut c = RunConfig::minimal();
            c.seed = seed;
            c.params.reynolds = re;
            c.params.weissenberg = we;
            c.params.retardation = a;
            c.discretization.k_max = k;
            c.discretization.quad_order = q;
            c.solver.t_final = t;
            c.solver.dt = dt;
            c.solver.scheme = [Scheme::Rk4, Scheme::Imex, Scheme::ExactStress][sch];
            c.solver.output_stride = stride;
            c.initial = match ik {
                0 => InitialSection::Rest {},
                1 => InitialSection::IsotropicStress { c: amp },
                2 => InitialSection::SingleMode { mode: 1, amplitude: amp },
                _ => InitialSection::Manufactured {},
            };
            c.forcing = match fk {
                0 => ForcingSection::Zero {},
                1 => ForcingSection::Manufactured {},
                2 => ForcingSection::Analytic { name: AnalyticForcing::Gradient, amplitude: amp },
                _ => ForcingSection::Analytic { name: AnalyticForcing::PulsedMode, amplitude: amp },
            };
            c
        })
}

proptest! {
    #[test]
    fn config_round_trip(c in arb_config()) {
        prop_assert_eq!(parse_config(&emit_config(&c)).unwrap(), c);
    }
}
