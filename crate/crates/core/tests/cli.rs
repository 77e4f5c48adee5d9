use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homoclinic"))
        .args(args)
        .arg("--override")
        .arg(format!("output_dir={}", out.display()))
        .output()
        .expect("binary runs")
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_desk_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path("d1.json");
    let out = run(&["--quiet", "solve", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows[0], "n,eta,norm_x,u_max,residual_inf,iterations,window_lo,window_hi,claim2,claim3");
    assert_eq!(rows.len(), 6);
    let etas: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(etas.windows(2).all(|w| w[1] < w[0]), "{etas:?}");
    assert!(rows[1..].iter().all(|r| r.ends_with("true,true")));

    let solutions = fs::read_to_string(dir.path().join("solutions.csv")).unwrap();
    assert!(solutions.starts_with("n,k,u_k\n"));
    let report = read_json(dir.path().join("report.json"));
    assert_eq!(report["config"]["N"], 5);
    assert!(report["claims"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    assert_eq!(report["sequence"]["armijo_violations"], 0);
}

#[test]
fn negative_lambda_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path("d1.json");
    let out = run(&["solve", cfg.to_str().unwrap(), "--override", "lambda=-1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("λ is a positive real parameter"));
    assert!(!dir.path().join("summary.csv").exists());
}

#[test]
fn zero_nonlinearity_fails_claims_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path("zero.json");
    let out = run(&["solve", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
    let report = read_json(dir.path().join("report.json"));
    assert_eq!(report["sequence"]["degenerate"], true);
    let c4 = report["claims"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["claim_id"] == "C4_eta_divergence")
        .unwrap();
    assert_eq!(c4["status"], "degenerate");
}

#[test]
fn solver_failure_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path("d1.json");
    let out = run(
        &["solve", cfg.to_str().unwrap(), "--override", "solver.max_iter=2", "--override", "solver.greedy_sweeps=0"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let report = read_json(dir.path().join("report.json"));
    assert!(!report["sequence"]["failures"].as_array().unwrap().is_empty());
}

#[test]
fn config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.json");
    let out = run(&["solve", missing.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    let text = fs::read_to_string(config_path("d1.json")).unwrap().replace("\"seed\"", "\"sede\"");
    fs::write(&bad, text).unwrap();
    let out = run(&["probe", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let cfg = config_path("d1.json");
    let out = run(&["gradcheck", cfg.to_str().unwrap(), "--override", "p=1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn probe_reports() {
    let dir = tempfile::tempdir().unwrap();
    let ex1 = config_path("example1.json");
    assert_eq!(run(&["probe", ex1.to_str().unwrap()], dir.path()).status.code(), Some(0));
    let doc = read_json(dir.path().join("probe.json"));
    assert_eq!(doc["f2"]["pass"], true);
    assert_eq!(doc["b"]["b_plus_diverging"], true);
    assert_eq!(doc["lambda_threshold"]["pass"], true);

    let kuang = config_path("kuang.json");
    assert_eq!(run(&["probe", kuang.to_str().unwrap()], dir.path()).status.code(), Some(0));
    let doc = read_json(dir.path().join("probe.json"));
    assert_eq!(doc["f2"]["pass"], false);
    assert!(doc["f2"]["witness"]["value"].as_f64().unwrap() > 0.0);

    let zero = config_path("zero.json");
    assert_eq!(run(&["probe", zero.to_str().unwrap()], dir.path()).status.code(), Some(0));
    let doc = read_json(dir.path().join("probe.json"));
    assert_eq!(doc["f1"]["pass"], true);
    assert_eq!(doc["f2"]["pass"], true);
    assert_eq!(doc["b"]["b_est"], 0.0);
    assert_eq!(doc["lambda_threshold"]["pass"], false);
}

#[test]
fn gradcheck_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path("d1.json");
    let out = run(&["gradcheck", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let first = fs::read(dir.path().join("gradcheck.json")).unwrap();
    let doc: Value = serde_json::from_slice(&first).unwrap();
    assert!(doc["gradcheck"]["max_rel_err"].as_f64().unwrap() <= 1e-6);
    assert_eq!(doc["gradcheck"]["vectors"], 100);

    run(&["gradcheck", cfg.to_str().unwrap()], dir.path());
    assert_eq!(first, fs::read(dir.path().join("gradcheck.json")).unwrap());

    let out = run(&["gradcheck", cfg.to_str().unwrap(), "--override", "p=1.5"], dir.path());
    let doc = read_json(dir.path().join("gradcheck.json"));
    assert!(doc["gradcheck"]["max_rel_err"].as_f64().unwrap() <= 1e-4, "{doc}");
    assert_eq!(doc["gradcheck"]["tol"], 1e-4);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path("example1.json");
    let mut snaps = Vec::new();
    for _ in 0..2 {
        assert_eq!(run(&["--quiet", "solve", cfg.to_str().unwrap()], dir.path()).status.code(), Some(0));
        snaps.push(["solutions.csv", "summary.csv", "report.json"].map(|f| fs::read(dir.path().join(f)).unwrap()));
    }
    assert_eq!(snaps[0], snaps[1]);

    // serial execution writes the same tables
    let serial = tempfile::tempdir().unwrap();
    let out = run(&["--quiet", "solve", cfg.to_str().unwrap(), "--override", "solver.parallel=false"], serial.path());
    assert_eq!(out.status.code(), Some(0));
    for f in ["solutions.csv", "summary.csv"] {
        assert_eq!(fs::read(serial.path().join(f)).unwrap(), fs::read(dir.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn version_flag() {
    let out = Command::new(env!("CARGO_BIN_EXE_homoclinic")).arg("--version").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
}
