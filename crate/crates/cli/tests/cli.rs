use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use holosim_cli::config::{self, Mode, Overrides};
use holosim_cli::output::{render_csv, Table};
use holosim_cli::{execute, sweeps, validate, Outcome};
use tempfile::TempDir;

fn holosim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holosim"))
        .args(args)
        .current_dir(dir)
        .env_remove("HOLOSIM_WORKERS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn resolved(mode: Mode, src: &str) -> config::RunConfig {
    config::resolve(mode, config::parse_file(src).unwrap(), &Overrides::default()).unwrap()
}

fn table(mode: Mode, src: &str) -> Table {
    let dir = TempDir::new().unwrap();
    match execute(&resolved(mode, src), Some(&dir.path().join("out.csv"))).unwrap() {
        Outcome::Table { table, .. } => table,
        Outcome::Report { .. } => panic!("sweep produced a report"),
    }
}

fn find_row(t: &Table, cols: &[(&str, f64)]) -> usize {
    (0..t.rows.len())
        .find(|&i| cols.iter().all(|(c, v)| t.num(i, c).is_some_and(|x| (x - v).abs() <= 1e-12 * v.abs().max(1.0))))
        .expect("row present")
}

fn eq19(r: f64, m: f64, lt: f64) -> f64 {
    8.0 * lt.sqrt() * ((2.0 * m + 1.0) * (2.0 * r).cosh() - 1.0).sqrt() / (2.0 * r).sinh()
}

#[test]
fn coupling_sweep_defaults() {
    let t = table(Mode::SweepEnvCoupling, "");
    assert_eq!(t.rows.len(), 4 * 42);
    for i in 0..t.rows.len() {
        if t.num(i, "lambda_tau") == Some(0.0) {
            assert_eq!(t.num(i, "ratio_approx"), Some(0.0));
            assert!(t.num(i, "ratio_full").unwrap() < 1e-6);
        }
    }
    let i = find_row(&t, &[("M", 0.0), ("lambda_tau", 1e-3)]);
    let approx = t.num(i, "ratio_approx").unwrap();
    assert!((approx - eq19(2.0, 0.0, 1e-3)).abs() < 1e-15);
    assert!((approx - 0.0475481).abs() < 1e-7);
}

#[test]
fn coupling_sweep_weak_coupling_band() {
    let t = table(Mode::SweepEnvCoupling, "");
    let mut outside = Vec::new();
    for i in 0..t.rows.len() {
        let lt = t.num(i, "lambda_tau").unwrap();
        if lt > 0.0 && lt <= 1e-4 {
            let q = t.num(i, "full_over_approx").unwrap();
            if !(0.9..=1.1).contains(&q) {
                outside.push((t.num(i, "M").unwrap(), lt, q));
            }
        }
    }
    assert!(outside.is_empty(), "{} weak-coupling rows outside [0.9, 1.1], e.g. {:?}", outside.len(), outside.first());
}

#[test]
fn squeezing_sweep_shapes() {
    let t = table(Mode::SweepEnvSqueezing, "");
    assert_eq!(t.rows.len(), 4 * 56);
    assert!(t.meta.contains(&("monotone_decreasing_r_ge_0.5".into(), "true".into())));
    assert!(t.meta.contains(&("m_ordering".into(), "true".into())));
    let c = table(Mode::SweepEnvCoupling, "");
    let s = table(
        Mode::SweepEnvSqueezing,
        "[sweep-env-squeezing]\nr = { start = 1.0, stop = 3.0, points = 3 }\n",
    );
    let a = s.num(find_row(&s, &[("M", 0.0), ("r", 2.0)]), "ratio_full").unwrap();
    let b = c.num(find_row(&c, &[("M", 0.0), ("lambda_tau", 1e-3)]), "ratio_full").unwrap();
    assert_eq!(a, b);
}

#[test]
fn modccr_sweep_columns() {
    let t = table(Mode::SweepModccr, "");
    assert_eq!(t.rows.len(), 3 * 56);
    let s = table(Mode::SweepModccr, "[sweep-modccr]\nr = { start = 1.0, stop = 2.0, points = 3 }\nepsilon = [0.05, 0.1]\n");
    let i = find_row(&s, &[("r", 1.0), ("epsilon", 0.05)]);
    assert!((s.num(i, "ratio_analytic").unwrap() - 0.110288).abs() < 1e-6);
    for r in [1.0, 1.5, 2.0] {
        let a = s.num(find_row(&s, &[("r", r), ("epsilon", 0.05)]), "ratio_analytic").unwrap();
        let b = s.num(find_row(&s, &[("r", r), ("epsilon", 0.1)]), "ratio_analytic").unwrap();
        assert_eq!(b, 2.0 * a);
    }
    let mut oracle_rows = 0;
    for i in 0..t.rows.len() {
        if let (Some(f), Some(a)) = (t.num(i, "ratio_fock"), t.num(i, "ratio_analytic")) {
            let eps = t.num(i, "epsilon").unwrap();
            assert!((f / a - 1.0).abs() <= 5.0 * eps, "row {i}");
            oracle_rows += 1;
        } else {
            assert!(t.num(i, "r").unwrap() > 1.2);
        }
    }
    assert!(oracle_rows > 0);
}

fn phase_mc(src: &str, seed: u64) -> Table {
    let mut cfg = resolved(Mode::PhaseMc, src);
    cfg.seed = seed;
    sweeps::run_phase_mc(&cfg.file.phase_mc, cfg.seed, cfg.cutoff).unwrap()
}

#[test]
fn phase_mc_recovers_correlation() {
    let t = phase_mc("", 7);
    let (rec, inj) = (t.num(0, "recovered").unwrap(), t.num(0, "injected").unwrap());
    assert_eq!(inj, 5e-5);
    assert!((rec / inj - 1.0).abs() < 0.1, "{rec}");
    let z = phase_mc("[phase-mc]\nrho = 0.0\nsamples = 20000\n", 8);
    assert!(z.num(0, "recovered").unwrap().abs() <= 3.0 * z.num(0, "recovered_se").unwrap());
}

#[test]
fn phase_mc_standard_error_scaling() {
    let a = phase_mc("[phase-mc]\nsamples = 40000\n", 1);
    let b = phase_mc("[phase-mc]\nsamples = 80000\n", 1);
    let shrink = a.num(0, "se_parallel").unwrap() / b.num(0, "se_parallel").unwrap();
    assert!((shrink / 2f64.sqrt() - 1.0).abs() < 0.1, "{shrink}");
}

#[test]
fn validate_default_and_fault() {
    let ok = validate::run_validate(config::Fault::None, None);
    assert!(ok.passed, "{:#?}", ok.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
    let bad = validate::run_validate(config::Fault::EvolveSign, None);
    assert!(!bad.passed);
    let failed: Vec<_> = bad.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    assert!(failed.contains(&"evolve_semigroup") || failed.contains(&"evolve_identity_at_t0"));
}

#[test]
fn binary_exit_codes_and_report() {
    let dir = TempDir::new().unwrap();
    let out = holosim(&["validate", "--out", "report.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    for check in report["checks"].as_array().unwrap() {
        assert!(check["name"].is_string() && check["tolerance"].is_number() && check["observed"].is_number());
    }

    let fault = write(dir.path(), "fault.toml", "[validate]\nfault = \"evolve-sign\"\n");
    let out = holosim(&["validate", "--config", fault.to_str().unwrap(), "--out", "f.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    let bad = write(dir.path(), "bad.toml", "seed = 1\n\n[sweep-modccr]\nepsilon = [0.5]\n");
    let out = holosim(&["sweep-modccr", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let out = holosim(&["sweep-env-coupling", "--config", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_holosim"))
        .args(["sweep-env-coupling"])
        .current_dir(dir.path())
        .env("HOLOSIM_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

fn strip_timestamp(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).lines().filter(|l| !l.starts_with("# generated_unix=")).collect::<Vec<_>>().join("\n")
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "mc.toml", "seed = 11\n[phase-mc]\nsamples = 5000\n");
    let mut runs = Vec::new();
    for (i, workers) in ["1", "3"].iter().enumerate() {
        let name = format!("run{i}.csv");
        let out = Command::new(env!("CARGO_BIN_EXE_holosim"))
            .args(["phase-mc", "--config", cfg.to_str().unwrap(), "--out", &name])
            .current_dir(dir.path())
            .env("HOLOSIM_WORKERS", workers)
            .output()
            .unwrap();
        assert!(out.status.success());
        runs.push(strip_timestamp(&fs::read(dir.path().join(&name)).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);
    assert!(runs[0].contains("# config="));
    assert!(runs[0].contains("\"seed\":11"));

    let c = resolved(Mode::SweepEnvSqueezing, "");
    let t = sweeps::run_sweep_env_squeezing(&c.file.env_squeezing).unwrap();
    let a = render_csv(&c, &t, 1).unwrap();
    let b = render_csv(&c, &t, 2).unwrap();
    assert_ne!(a, b);
    assert_eq!(strip_timestamp(&a), strip_timestamp(&b));
}

#[test]
fn sweep_writes_csv_and_gnuplot() {
    let dir = TempDir::new().unwrap();
    let out = holosim(&["sweep-env-coupling", "--out", "fig/coupling.csv"], dir.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("fig/coupling.csv")).unwrap();
    let (header, body): (Vec<&str>, Vec<&str>) = csv.lines().partition(|l| l.starts_with('#'));
    assert!(header.iter().all(|l| l[2..].contains('=')));
    assert!(body[0].starts_with("lambda_tau,M,r,"));
    let data = &body[1..];
    assert_eq!(data.len(), 4 * 42);
    for row in data {
        for cell in row.split(',') {
            if let Ok(v) = cell.parse::<f64>() {
                assert_eq!(holosim_cli::output::format_number(v), cell);
            }
        }
    }
    let gp = fs::read_to_string(dir.path().join("fig/coupling.gp")).unwrap();
    assert!(gp.contains("'coupling.csv'") && gp.contains("set logscale x"));
}
