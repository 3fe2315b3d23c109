use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_euler-chaos"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn constants_table_contains_a2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["constants", "--n-max", "2", "--gamma", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("constants.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,gamma,a_N,beta_N,a_N_exact"));
    assert!(csv.lines().any(|l| l.starts_with("2,2,7,")), "{csv}");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("constants.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "constants");
    // Defaults are recorded even when not given.
    assert!((manifest["config"]["theta"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(manifest["argv"][0], "--out-dir");
}

#[test]
fn simulate_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "--n", "4", "--gamma", "2", "--t-end", "1", "--steps", "200", "--seed", "7",
    ];
    let oa = run_in(a.path(), &args);
    let ob = run_in(b.path(), &args);
    assert!(oa.status.success() && ob.status.success(), "{}", stderr(&oa));
    let ca = fs::read(a.path().join("simulate.csv")).unwrap();
    let cb = fs::read(b.path().join("simulate.csv")).unwrap();
    assert_eq!(ca, cb);
    assert_eq!(String::from_utf8_lossy(&ca).lines().count(), 202);
}

#[test]
fn thread_count_does_not_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["simulate", "--n", "3", "--t-end", "0.1", "--trajectories", "6", "--seed", "3"];
    let oa = bin()
        .env("EULER_CHAOS_THREADS", "1")
        .arg("--out-dir")
        .arg(a.path())
        .args(args)
        .output()
        .unwrap();
    let ob = bin()
        .env("EULER_CHAOS_THREADS", "3")
        .arg("--out-dir")
        .arg(b.path())
        .args(args)
        .output()
        .unwrap();
    assert!(oa.status.success() && ob.status.success());
    assert_eq!(
        fs::read(a.path().join("simulate.csv")).unwrap(),
        fs::read(b.path().join("simulate.csv")).unwrap()
    );
}

#[test]
fn bad_thread_variable_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .env("EULER_CHAOS_THREADS", "zero")
        .arg("--out-dir")
        .arg(dir.path())
        .args(["constants"])
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(stderr(&o).contains("EULER_CHAOS_THREADS"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["simulate", "--bogus", "1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
    let o = run_in(dir.path(), &["no-such-command"]);
    assert!(!o.status.success());
}

#[test]
fn invalid_ranges_name_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["simulate", "--n", "0"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("`N`"), "{}", stderr(&o));
    let o = run_in(dir.path(), &["constants", "--theta", "0.7"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("theta"), "{}", stderr(&o));
    let o = run_in(dir.path(), &["kolmogorov", "--rho0", "bogus"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("rho0"), "{}", stderr(&o));
    let o = run_in(dir.path(), &["nonlinear", "--n", "6", "--m", "3"]);
    assert!(!o.status.success());
}

#[test]
fn chaos_decomposition_holds_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["chaos", "--n-list", "6", "--multi-index", "1,1:1;0,1:1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("chaos.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("6,"));
    assert_eq!(row.split(',').nth(3), Some("true"));
}

#[test]
fn nonlinear_reports_consistent_variance() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["nonlinear", "--n", "2", "--m", "4", "--samples", "20000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut reader = csv::Reader::from_path(dir.path().join("nonlinear.csv")).unwrap();
    let row = reader.records().next().unwrap().unwrap();
    assert_eq!(&row[0], "(1,2)");
    let z: f64 = row[6].parse().unwrap();
    assert!(z.abs() < 5.0, "{row:?}");
    assert_eq!(&row[7], "0");
}

#[test]
fn kolmogorov_writes_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &[
            "kolmogorov",
            "--n-list",
            "2,3",
            "--t",
            "0.01",
            "--points",
            "50",
            "--trajectories",
            "10",
            "--samples",
            "50",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("kolmogorov.csv")).unwrap();
    assert!(csv.starts_with("N,t,estimate,stderr,beta_N,quantity"));
    // Two L^p pairs, the mass row and the projection per N.
    assert_eq!(csv.lines().count(), 1 + 2 * 6);
}

#[test]
fn verify_all_quick_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["verify-all", "--quick"]);
    assert!(o.status.success(), "{}\n{}", stdout(&o), stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("criterion")).count(), 11);
    assert!(dir.path().join("verify.csv").exists());
}

#[test]
fn verify_all_rejects_unknown_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["verify-all", "--only", "12"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("criterion 12"));
}
