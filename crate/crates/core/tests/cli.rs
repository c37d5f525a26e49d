use std::fs;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rnsadapt")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn missing_scenario_file_names_the_path() {
    let o = cli(&["run", "--scenario", "/no/such/scenario.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("config error") && err.contains("/no/such/scenario.toml"), "{err}");
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = cli(&["run", "--duration", "0.5", "--dt", "0.005", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 102);
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    for key in ["final_abs_omega_b_rad_per_s", "max_dx_norm_m", "final_dx_norm_m", "guard_triggers", "max_momentum_drift"] {
        assert!(summary.contains(key), "{key}");
    }
    assert!(summary.starts_with("mode = full"));
    let plots = fs::read_to_string(out.join("plots.gp")).unwrap();
    assert_eq!(plots.matches("set output").count(), 8);
}

#[test]
fn scenario_file_and_mode_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    fs::write(&path, "[run]\nduration_s = 0.1\ndt_s = 0.01\n").unwrap();
    let out = dir.path().join("o");
    let o = cli(&[
        "run", "--scenario", path.to_str().unwrap(), "--mode", "attitude-only", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(out.join("summary.txt")).unwrap().starts_with("mode = attitude-only"));
    assert_eq!(fs::read_to_string(out.join("trace.csv")).unwrap().lines().count(), 12);
}

#[test]
fn comparison_preset() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = cli(&["run", "--preset", "paper-fig2-4", "--duration", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for label in ["nonzero-momenta", "zero-momenta"] {
        assert!(out.join(label).join("trace.csv").exists());
    }
    let table = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(table.contains("steady_dx_norm ratio zero-momenta / nonzero-momenta"));
    assert!(fs::read_to_string(out.join("plots.gp")).unwrap().contains("zero-momenta/trace.csv"));
}

#[test]
fn bad_arguments_fail() {
    assert_eq!(cli(&["run", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(cli(&["run", "--dt", "-1", "--out", "/tmp/unused"]).status.code(), Some(2));
    assert!(!cli(&["run", "--mode", "fast"]).status.success());
}

#[test]
fn verify_passes_and_is_reproducible() {
    let a = cli(&["verify", "--seed", "42", "--samples", "300"]);
    assert!(a.status.success(), "{}", stdout(&a));
    assert!(stdout(&a).contains("8 passed, 0 failed"));
    let b = cli(&["verify", "--seed", "42", "--samples", "300"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn verify_flags_a_corrupted_mass() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("heavy.toml");
    let body = |m: f64, i: f64, l: f64| {
        format!("[[model.bodies]]\nmass_kg = {m}\ninertia_kg_m2 = {i}\nl_m = {l}\nr_m = {l}\n")
    };
    let text = [
        body(61.2 * 1.1, 26.112, 0.8),
        body(6.3, 1.029, 0.7),
        body(5.4, 0.882, 0.7),
        body(5.1, 0.833, 0.7),
    ]
    .concat();
    fs::write(&path, text).unwrap();
    let o = cli(&["verify", "--scenario", path.to_str().unwrap(), "--samples", "200"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let failed: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(failed.len(), 1, "{text}");
    assert!(failed[0].contains("p0/v0 published values"));
}
