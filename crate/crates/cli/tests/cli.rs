use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cornerlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cornerlab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(cfg: &Path, out: &Path) -> Output {
    cornerlab(&["--jobs", "1", "run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn stderr_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(text.lines().last().expect("stderr line")).unwrap()
}

const CLASSIFY: &str = r#"
command = "classify"
[parameters]
psi0 = 1.5707963
incident = { kind = "bessel", k = 1.0, order = 2 }
"#;

#[test]
fn classify_reports_exceptional_pair() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", CLASSIFY);
    let o = run(&cfg, tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["class_E"], Value::Bool(true));
    assert_eq!(v["l"], 1);
    assert_eq!(v["N"], 1);
}

#[test]
fn negative_epsilon_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"
command = "cgo"
[parameters]
grid = 64
sector = { vertex = [0.0, 0.0], theta_ref = 0.0, aperture = 1.5, epsilon = -1.0 }
"#;
    let cfg = write_config(tmp.path(), "bad.toml", text);
    let o = run(&cfg, tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let v = stderr_json(&o);
    assert_eq!(v["error"], "config");
    assert_eq!(v["field"], "parameters.sector.epsilon");
    assert!(fs::read_dir(tmp.path()).unwrap().all(|e| e.unwrap().path().extension().is_some()), "no run directory");
}

#[test]
fn unknown_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", &format!("{CLASSIFY}psi1 = 2.0\n"));
    let o = run(&cfg, tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["message"].as_str().unwrap().contains("psi1"));
    let top = write_config(tmp.path(), "d.toml", &format!("colour = 1\n{CLASSIFY}"));
    assert_eq!(run(&top, tmp.path()).status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = cornerlab(&["run", "--config", "/nonexistent/x.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lists_twelve_suites() {
    let o = cornerlab(&["list-suites"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(names.len(), 12);
    for n in ["lemma53_constants", "disc_mie_validation", "hull_uniqueness_square"] {
        assert!(names.contains(&n), "{n}");
    }
}

const FORWARD: &str = r#"
command = "forward"
[parameters]
grid = 64
n_angles = 32
incident = { kind = "plane", k = 2.0, angle = 0.3 }
oracle_tolerance = 1e-2
[parameters.medium]
shape = "disc"
center = [0.0, 0.0]
radius = 1.0
c = 2.0
"#;

#[test]
fn identical_configs_give_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "f.toml", FORWARD);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&cfg, &a).status.code(), Some(0));
    assert_eq!(run(&cfg, &b).status.code(), Some(0));
    let dir = |p: &Path| fs::read_dir(p).unwrap().next().unwrap().unwrap().path();
    let (da, db) = (dir(&a), dir(&b));
    assert_eq!(da.file_name(), db.file_name());
    for f in ["far_field.csv", "summary.json", "u_scattered.bin", "u_scattered.json"] {
        assert_eq!(fs::read(da.join(f)).unwrap(), fs::read(db.join(f)).unwrap(), "{f}");
    }
    let manifest: Value = serde_json::from_slice(&fs::read(da.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["passed"], true);
    let csv = fs::read_to_string(da.join("far_field.csv")).unwrap();
    assert_eq!(csv.lines().count(), 33);
}

#[test]
fn equivalent_configs_share_a_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let explicit = FORWARD.replace("n_angles = 32", "n_angles = 32\nsolver = { tol = 1e-10, restart = 40, max_iter = 600 }");
    let a = write_config(tmp.path(), "a.toml", FORWARD);
    let b = write_config(tmp.path(), "b.toml", &explicit);
    let out = tmp.path().join("runs");
    run(&a, &out);
    run(&b, &out);
    assert_eq!(fs::read_dir(&out).unwrap().count(), 1);
}

#[test]
fn suite_runs_from_the_command_line() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cornerlab(&["run-suite", "jet_structure", "--profile", "ci", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["passed"], true);
    assert_eq!(cornerlab(&["run-suite", "no_such_suite", "--out", tmp.path().to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn failed_assertions_exit_one_with_json() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"
command = "herglotz"
[parameters]
lambdas = [1e-2, 1e-4, 1e-6]
kernel_size = 32
"#;
    let cfg = write_config(tmp.path(), "h.toml", text);
    let o = run(&cfg, tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let v = stderr_json(&o);
    assert_eq!(v["error"], "assertion");
    assert!(!v["failures"].as_array().unwrap().is_empty());
}
