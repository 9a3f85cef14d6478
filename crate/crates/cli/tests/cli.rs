use std::path::Path;
use std::process::{Command, Output};

fn fastreact(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fastreact")).args(args).output().unwrap()
}

const SMALL: &str = "solver.n_cells = 32\nsolver.T = 0.05\nsolver.epsilon = 1e-2\nsolver.snapshot_stride = 4\n\
kinetics.cells_t = 4\nkinetics.cells_x = 4\nkinetics.xi_bins = 64\nrun.plot_times = 0.05\n";

fn config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn run_writes_artifacts_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = fastreact(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("report.json").exists());
    assert!(String::from_utf8_lossy(&o.stdout).contains("mass_drift"));
}

#[test]
fn bad_config_exits_one_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "solver.epsilon = -1\n");
    let o = fastreact(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("solver.epsilon"));
}

#[test]
fn sweep_takes_an_eps_list() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let out = dir.path().join("sweep");
    let o = fastreact(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--eps", "2e-2,1e-2,5e-3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("sweep.csv").exists());
    let o = fastreact(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--eps", "2e-2,1e-2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_model_certifies_the_reference_cubic() {
    let dir = tempfile::tempdir().unwrap();
    let o = fastreact(&["check-model", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("Wronskian"));
    assert!(dir.path().join("model.json").exists());
}

#[test]
fn compare_plotnikov_rejects_a_noninvertible_lift() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        &format!("{SMALL}model.kind = coefficients\nmodel.coeffs = 0, 12, -9, 2\nmodel.u_max = 3\n"),
    );
    let o = fastreact(&["compare-plotnikov", "--config", &cfg, "--out", dir.path().join("c").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = fastreact(&[
        "compare-plotnikov",
        "--config",
        &config(dir.path(), SMALL),
        "--out",
        dir.path().join("c").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("c/plotnikov.json").exists());
}

#[test]
fn unknown_verb_is_a_usage_error() {
    assert_ne!(fastreact(&["frobnicate"]).status.code(), Some(0));
}
