use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fracks(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracks"))
        .args(args)
        .env_remove("FRACKS_THREADS")
        .output()
        .expect("spawn fracks")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn only_dir(root: &Path) -> std::path::PathBuf {
    let dirs: Vec<_> = fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.into_iter().next().unwrap()
}

#[test]
fn version_prints_build_identifier() {
    let o = fracks(&["--version"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn simulate_linear_decay_writes_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = fracks(&[
        "simulate",
        "--alpha",
        "1",
        "--chi",
        "0",
        "--r",
        "0",
        "--ic",
        "cosine:0.1",
        "--t-end",
        "1",
        "--n",
        "64",
        "--out",
        out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dir = only_dir(tmp.path());
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["outcome"], "COMPLETED");
    assert_eq!(meta["initial_condition"], "cosine:0.1");
    // 1 + 0.1 e^{-t} cos x at t = 1
    let field = fs::read_to_string(dir.join("final_field.csv")).unwrap();
    let mut worst: f64 = 0.0;
    for line in field.lines().skip(1) {
        let mut cols = line.split(',');
        let x: f64 = cols.next().unwrap().parse().unwrap();
        let u: f64 = cols.next().unwrap().parse().unwrap();
        worst = worst.max((u - 1.0 - 0.1 * (-1.0f64).exp() * x.cos()).abs());
    }
    assert!(worst < 1e-4, "{worst}");
    assert!(dir.join("records.csv").exists());
}

#[test]
fn simulate_classical_logistic_case_completes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fracks(&[
        "simulate",
        "--alpha",
        "2",
        "--beta",
        "2",
        "--chi",
        "1",
        "--r",
        "1",
        "--ic",
        "bump:3",
        "--t-end",
        "10",
        "--n",
        "128",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn simulate_reports_blowup_with_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fracks(&[
        "simulate",
        "--alpha",
        "0.8",
        "--chi",
        "1",
        "--r",
        "0",
        "--ic",
        "bump:40",
        "--t-end",
        "5",
        "--n",
        "256",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));
    assert!(stdout(&o).contains("BLOWUP_DETECTED"));
}

#[test]
fn simulate_usage_errors_exit_one() {
    let o = fracks(&["simulate", "--chi", "1"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--alpha"));
    let o = fracks(&["simulate", "--alpha", "3"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("alpha"));
    let o = fracks(&["simulate", "--alpha", "1", "--n", "7"]);
    assert_eq!(code(&o), 1);
    let o = fracks(&["simulate", "--alpha", "1", "--ic", "square:2"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--ic"));
    let o = fracks(&["simulate", "--alpha", "1", "--variant", "poisson"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn verify_writes_json_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("summary.json");
    let o = fracks(&[
        "verify",
        "--suite",
        "elliptic",
        "--trials",
        "50",
        "--seed",
        "7",
        "--n",
        "64",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for r in reports {
        assert_eq!(r["status"], "PASS");
        assert_eq!(r["violations"], 0);
        assert!(r["check_name"].as_str().unwrap().starts_with("elliptic_"));
    }
}

#[test]
fn verify_logsobolev_passes() {
    let o = fracks(&["verify", "--suite", "logsobolev", "--trials", "500"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn verify_rejects_bad_arguments() {
    let o = fracks(&["verify", "--suite", "all", "--trials", "0"]);
    assert_eq!(code(&o), 1);
    let o = fracks(&["verify", "--suite", "everything"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn oracle_compare_single_mode_and_expcos() {
    let o = fracks(&[
        "oracle-compare",
        "--alpha",
        "1",
        "--ic",
        "cosine:1",
        "--n",
        "64",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let s = stdout(&o);
    assert!(s.contains("max_abs_deviation") && s.contains("max_rel_deviation"));
    let o = fracks(&[
        "oracle-compare",
        "--alpha",
        "0.5",
        "--ic",
        "expcos",
        "--n",
        "128",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn oracle_compare_near_endpoint_reports_self_tolerance() {
    let o = fracks(&["oracle-compare", "--alpha", "1.99", "--n", "128"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("oracle_self_tolerance"));
}

#[test]
fn oracle_compare_rejects_alpha_outside_open_interval() {
    for a in ["0", "2", "2.5"] {
        let o = fracks(&["oracle-compare", "--alpha", a]);
        assert_eq!(code(&o), 1, "alpha {a}");
    }
}

const SWEEP: &str = r#"{
    "alpha_grid": [1.0, 0.6],
    "chi_grid": [1.0],
    "r_grid": [2.0, 0.5],
    "ic_family": "bump:5",
    "config": {"n": 64, "t_end": 0.5, "dt_init": 0.005},
    "parallelism": 1
}"#;

fn run_sweep(dir: &Path, config: &str, threads: Option<&str>) -> (Output, String) {
    let cfg = dir.join("sweep.json");
    fs::write(&cfg, config).unwrap();
    let out = dir.join(format!("map_{}.csv", threads.unwrap_or("spec")));
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fracks"));
    cmd.args([
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    match threads {
        Some(t) => cmd.env("FRACKS_THREADS", t),
        None => cmd.env_remove("FRACKS_THREADS"),
    };
    let o = cmd.output().unwrap();
    let csv = fs::read_to_string(&out).unwrap_or_default();
    (o, csv)
}

#[test]
fn sweep_writes_sorted_map_independent_of_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let (o1, a) = run_sweep(tmp.path(), SWEEP, None);
    assert_eq!(code(&o1), 0, "{}", stderr(&o1));
    let (o4, b) = run_sweep(tmp.path(), SWEEP, Some("4"));
    assert_eq!(code(&o4), 0, "{}", stderr(&o4));
    assert_eq!(a, b);
    let lines: Vec<_> = a.lines().collect();
    assert_eq!(
        lines[0],
        "alpha,chi,r,outcome,t_final,sup_linf,alpha_star_strong,alpha_star_weak,gated"
    );
    assert_eq!(lines.len(), 5);
    let alphas: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(alphas, vec![0.6, 0.6, 1.0, 1.0]);
}

#[test]
fn sweep_config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let (o, _) = run_sweep(tmp.path(), &SWEEP.replace("[1.0, 0.6]", "[]"), None);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("alpha_grid"));
    let (o, _) = run_sweep(tmp.path(), &SWEEP.replace("\"r_grid\"", "\"rgrid\""), None);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("rgrid") && err.contains("line 4"), "{err}");
    let (o, _) = run_sweep(tmp.path(), "{ not json", None);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 1"));
}
