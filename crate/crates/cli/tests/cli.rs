use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &str = "model.alpha = 0.2
model.beta = 0.1
model.gamma = 0.5
model.ell = 0.01
resolution.n1 = 4
resolution.n2 = 4
resolution.p = 8
time.dt = 0.01
time.t_final = 0.05
forcing.id = smooth
adn.samples = 8
adn.random = 4
";

fn nsab(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nsab"));
    c.args(args).env_remove("NSAB_OUT_DIR");
    if let Some(d) = env_out {
        c.env("NSAB_OUT_DIR", d);
    }
    c.output().unwrap()
}

fn write_cfg(dir: &Path, extra: &str) -> String {
    let p = dir.join("run.cfg");
    fs::write(&p, format!("{SMALL}{extra}")).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_adn_succeeds() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_cfg(t.path(), "");
    let out = t.path().join("out");
    let o = nsab(&["verify-adn", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("adn_report.json"));
    assert_eq!(report["pass"], true);
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["experiment"], "verify-adn");
    assert_eq!(manifest["exit_code"], 0);
    assert!(manifest["outputs"].as_array().unwrap().iter().any(|f| f == "adn_report.json"));
    assert!(out.join("config.echo").exists());
}

#[test]
fn eigs_lists_nondecreasing_values() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_cfg(t.path(), "eigs.count = 20\n");
    let out = t.path().join("out");
    let o = nsab(&["eigs", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("eigs.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,lambda,eta1,eta2,residual"));
    let lambdas: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(lambdas.len(), 20);
    assert!(lambdas.windows(2).all(|w| w[0] <= w[1]));
    assert!(out.join("garding.json").exists());
}

#[test]
fn injected_nan_exits_with_watchdog() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_cfg(t.path(), "time.inject_nan_at = 2\n");
    let out = t.path().join("out");
    let o = nsab(&["evolve", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(4));
    let outcome = json(&out.join("outcome.json"));
    assert_eq!(outcome["outcome"]["status"], "watchdog");
    assert_eq!(outcome["outcome"]["reason"], "non-finite state");
    assert_eq!(json(&out.join("manifest.json"))["status"], "watchdog");
}

#[test]
fn config_errors_exit_two_with_a_report() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_cfg(t.path(), "model.alpha = 0.05\n");
    let out = t.path().join("out");
    let o = nsab(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("duplicate key"), "{stderr}");
    let err = json(&out.join("error.json"));
    assert_eq!(err["status"], "error");
    assert_eq!(err["exit_code"], 2);
    assert_eq!(err["config_error"]["kind"], "duplicate_key");
}

#[test]
fn mismatched_experiment_kind_is_a_config_error() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_cfg(t.path(), "experiment.kind = eigs\n");
    let o = nsab(&["solve", "--config", &cfg, "--out", t.path().join("o").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_reported() {
    let t = tempfile::tempdir().unwrap();
    let o = nsab(&["solve", "--config", t.path().join("nope.cfg").to_str().unwrap(), "--out", t.path().to_str().unwrap()], None);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn serial_rerun_from_echo_is_byte_identical() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_cfg(t.path(), "initial.id = random\nrun.seed = 11\ntime.snapshot_every = 2\n");
    let a = t.path().join("a");
    let b = t.path().join("b");
    let o = nsab(&["evolve", "--config", &cfg, "--out", a.to_str().unwrap(), "--serial"], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let echo = a.join("config.echo");
    let o = nsab(&["evolve", "--config", echo.to_str().unwrap(), "--out", b.to_str().unwrap(), "--serial"], None);
    assert_eq!(o.status.code(), Some(0));
    for f in ["energy.csv", "config.echo", "snapshot_00001.snap", "outcome.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let manifest = json(&a.join("manifest.json"));
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["serial"], true);
}

#[test]
fn seed_override_changes_the_run() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_cfg(t.path(), "initial.id = random\n");
    let a = t.path().join("a");
    let b = t.path().join("b");
    nsab(&["evolve", "--config", &cfg, "--out", a.to_str().unwrap(), "--seed", "1"], None);
    nsab(&["evolve", "--config", &cfg, "--out", b.to_str().unwrap(), "--seed", "2"], None);
    assert_ne!(fs::read(a.join("energy.csv")).unwrap(), fs::read(b.join("energy.csv")).unwrap());
    assert!(fs::read_to_string(b.join("config.echo")).unwrap().contains("run.seed = 2\n"));
}

#[test]
fn output_directory_precedence() {
    let t = tempfile::tempdir().unwrap();
    let from_cfg = t.path().join("from_cfg");
    let cfg = write_cfg(t.path(), &format!("output.dir = {}\n", from_cfg.display()));
    let env_dir = t.path().join("from_env");
    let o = nsab(&["verify-adn", "--config", &cfg], Some(&env_dir));
    assert_eq!(o.status.code(), Some(0));
    assert!(env_dir.join("manifest.json").exists());
    assert!(!from_cfg.exists());

    let flag_dir = t.path().join("from_flag");
    nsab(&["verify-adn", "--config", &cfg, "--out", flag_dir.to_str().unwrap()], Some(&env_dir));
    assert!(flag_dir.join("manifest.json").exists());

    nsab(&["verify-adn", "--config", &cfg], None);
    assert!(from_cfg.join("manifest.json").exists());
}

#[test]
fn solve_writes_a_readable_snapshot() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_cfg(t.path(), "");
    let out = t.path().join("out");
    let o = nsab(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let snap = nsab_cli::snapshot::Snapshot::read(&out.join("solution.snap")).unwrap();
    assert_eq!(snap.meta.resolution.n1, 4);
    assert!(out.join("solve_report.json").exists());
}

#[test]
fn help_mentions_exit_codes() {
    let o = nsab(&["--help"], None);
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(s.contains("NSAB_OUT_DIR") && s.contains("4"), "{s}");
}
