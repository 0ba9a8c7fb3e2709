use std::path::Path;
use std::process::{Command, Output};

fn plaplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plaplab")).args(args).env("PLAP_THREADS", "2").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn no_arguments_prints_usage() {
    let o = plaplab(&[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn empty_config_is_misuse() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.cfg");
    std::fs::write(&path, "").unwrap();
    let o = plaplab(&["--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn bad_config_and_flags_are_misuse() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "command = imcf\ntol.limit = 0\n").unwrap();
    let o = plaplab(&["--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("tol.limit"));
    assert_eq!(code(&plaplab(&["imcf", "--metric", "torus"])), 2);
    assert_eq!(code(&plaplab(&["entropy", "--plots", "entropy:Q"])), 2);
    assert_eq!(code(&plaplab(&["nonsense"])), 2);
    assert_eq!(code(&plaplab(&["--config", "/nonexistent/x.cfg"])), 2);
}

#[test]
fn imcf_example_writes_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("imcf");
    let o = plaplab(&["imcf", "--metric", "euclidean", "--n", "3", "--p-seq", "1.5,1.3,1.2,1.1,1.05", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let json = std::fs::read_to_string(out.join("bundle.json")).unwrap();
    let b = plap::ReportBundle::from_json(&json).unwrap();
    assert!(b.pass);
    assert_eq!(b.manifest.command, "imcf");
    assert!(b.reports.iter().any(|r| matches!(r, plap::Report::Continuation(c) if c.rows.len() == 5)));
    let csv = std::fs::read_to_string(out.join("imcf_sup_grad.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(!out.join("bundle.json.tmp").exists());
}

#[test]
fn failed_estimate_exits_one() {
    let o = plaplab(&["solve-elliptic", "--p", "1.5", "--h", "0.03125", "--set", "tol.rel=1e-9"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("overall: FAIL"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("id.cfg");
    std::fs::write(&path, "command = identities\nidentities = bochner2, mainevol\n").unwrap();
    let out = dir.path().join("o");
    let o = plaplab(&["--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("identity:bochner2") && stdout.contains("identity:mainevol"));
    assert!(!stdout.contains("identity:ptwise-V"));
    let b = plap::ReportBundle::from_json(&std::fs::read_to_string(out.join("bundle.json")).unwrap()).unwrap();
    assert!(b.manifest.config.contains("identities = bochner2, mainevol"));
}

fn csv_of(dir: &Path, seed: &str) -> String {
    let o = plaplab(&["parabolic", "--equation", "A", "--data", "barenblatt", "--p", "1.8", "--samples", "4", "--seed", seed, "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read_to_string(dir.join("harnack_par-global.csv")).unwrap()
}

#[test]
fn identical_configs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = csv_of(&dir.path().join("a"), "5");
    let b = csv_of(&dir.path().join("b"), "5");
    assert_eq!(a, b);
    assert!(a.lines().count() > 1);
}
