//! End-to-end tests of the `qccr` binary: output of the worked examples,
//! the exit-code contract, determinism, and the export container.

use std::process::Command;

fn qccr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qccr"))
}

fn stdout_of(args: &[&str]) -> (String, Option<i32>) {
    let out = qccr().args(args).output().expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).to_string(),
        out.status.code(),
    )
}

#[test]
fn calc_normal_orders_the_relation() {
    let (out, code) = stdout_of(&["calc", "a1 c1"]);
    assert_eq!(code, Some(0));
    assert!(out.contains("(1-q)*I + q*c1 a1"), "got: {out}");

    let (out, _) = stdout_of(&["calc", "a1 c1 c1"]);
    assert!(out.contains("(1-q^2)*c1 + q^2*c1 c1 a1"), "got: {out}");

    let (out, _) = stdout_of(&["calc", "c1 a1", "--phi", "0"]);
    assert!(out.contains("omega_phi = 0"), "got: {out}");
}

#[test]
fn calc_float_mode_and_phi_pairs() {
    // omega_phi(a1 c1) = (1-q) + q |phi_1|^2 at q = 0.25, phi = 0.5
    let (out, code) = stdout_of(&["calc", "a1 c1", "--q", "0.25", "--phi", "0.5"]);
    assert_eq!(code, Some(0));
    assert!(out.contains("8.1250000000000000e-1"), "got: {out}");
    // complex phi as (re, im) pairs: d = 1, two components
    let (out, _) = stdout_of(&["calc", "c1 a1", "--q", "0.5", "--phi", "0.6,0.8"]);
    // omega(c1 a1) = |phi|^2 = 1
    assert!(
        out.contains("omega_phi = 1.0000000000000000e0"),
        "got: {out}"
    );
}

#[test]
fn exit_code_contract() {
    // usage errors: 2
    assert_eq!(
        qccr().args(["verify"]).output().unwrap().status.code(),
        Some(2)
    );
    assert_eq!(
        qccr()
            .args(["verify", "--suite", "nope"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qccr()
            .args(["calc", "c1 + $"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(2)
    );
    // budget: 3, and the partial report is still emitted
    let out = qccr()
        .args(["verify", "--suite", "fock", "--N", "20", "--budget", "100"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("partial report is valid JSON");
    assert_eq!(report["all_pass"], serde_json::Value::Bool(false));
    // success: 0
    assert_eq!(
        qccr()
            .args(["verify", "--suite", "single-mode", "--q", "0.5"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn verify_report_shape() {
    let out = qccr()
        .args(["verify", "--suite", "single-mode", "--q", "0.5"])
        .output()
        .unwrap();
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema_version"], "1");
    assert!(report["config"]["q_values"].is_array());
    let checks = report["checks"].as_array().unwrap();
    assert!(checks
        .iter()
        .any(|c| c["name"].as_str().unwrap().contains("epsilon_cross_check")));
    for c in checks {
        assert!(c["pass"].as_bool().unwrap(), "{c}");
        assert!(c["measured"].is_number());
        assert!(c["bound"].is_number());
    }
}

#[test]
fn table_values_and_undefined_markers() {
    let (out, code) = stdout_of(&[
        "table", "--q", "0", "--q", "-0.5", "--q", "1", "--format", "csv",
    ]);
    assert_eq!(code, Some(0));
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("q,shift_norm_closed"));
    // q = 0 row: all ones
    assert!(lines[1]
        .split(',')
        .skip(1)
        .all(|f| f.starts_with("1.0000000000000000e0")));
    // q = -0.5: closed norm sqrt(1.5)
    assert!(
        lines[2].contains("1.2247448713915889e0"),
        "got {}",
        lines[2]
    );
    // |q| = 1 rows carry explicit markers, not NaN
    assert!(lines[3].contains("undefined"));
    assert!(!out.contains("NaN"));
    // threshold record near 0.44
    let threshold_line = lines.last().unwrap();
    assert!(
        threshold_line.starts_with("epsilon_threshold,4.400"),
        "got {threshold_line}"
    );
}

#[test]
fn table_is_deterministic_and_parallel_safe() {
    let args = ["table", "--q-grid", "-0.9:0.9:0.3", "--format", "json"];
    let (a, _) = stdout_of(&args);
    let (b, _) = stdout_of(&args);
    assert_eq!(
        a, b,
        "two runs with identical config must be byte-identical"
    );
    let mut with_jobs: Vec<&str> = args.to_vec();
    with_jobs.extend(["--jobs", "4"]);
    let (c, _) = stdout_of(&with_jobs);
    assert_eq!(a, c, "parallel assembly must preserve grid order");
}

#[test]
fn env_overrides_budget_and_tolerance() {
    // QCCR_BUDGET caps the basis like --budget
    let out = qccr()
        .args(["verify", "--suite", "fock", "--N", "20"])
        .env("QCCR_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    // the flag wins over the environment
    let out = qccr()
        .args([
            "verify",
            "--suite",
            "single-mode",
            "--q",
            "0.5",
            "--budget",
            "5000",
        ])
        .env("QCCR_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    // QCCR_TOL lands in the embedded config
    let out = qccr()
        .args(["verify", "--suite", "single-mode", "--q", "0.5"])
        .env("QCCR_TOL", "1e-9")
        .output()
        .unwrap();
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["config"]["tol"], serde_json::json!(1e-9));
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "--suite", "wick", "--q", "0.5", "--q", "-0.5"];
    let (a, code) = stdout_of(&args);
    assert_eq!(code, Some(0));
    let (b, _) = stdout_of(&args);
    assert_eq!(a, b);
}

#[test]
fn export_round_trips_through_the_loader() {
    let dir = std::env::temp_dir().join(format!("qccr_cli_test_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("rep.json");
    let code = qccr()
        .args([
            "export", "--kind", "fock", "--d", "2", "--q", "0.5", "--N", "3", "--out",
        ])
        .arg(&path)
        .output()
        .unwrap()
        .status
        .code();
    assert_eq!(code, Some(0));
    let raw = std::fs::read_to_string(&path).unwrap();
    let parsed: qccr::export::RepExport = serde_json::from_str(&raw).unwrap();
    let loaded = qccr::export::load_rep(&parsed, &qccr::fock::FockBudget::default()).unwrap();
    let rebuilt =
        qccr::fock::build_fock_rep(2, 0.5, 3, &qccr::fock::FockBudget::default()).unwrap();
    for (a, b) in loaded.gram().iter().zip(rebuilt.gram().iter()) {
        assert_eq!(a.to_bits(), b.to_bits(), "loader must be bit-exact");
    }
    // clifford export from a coherent phi
    let cpath = dir.join("clifford.json");
    let code = qccr()
        .args([
            "export", "--kind", "clifford", "--d", "2", "--phi", "0.6,0.8", "--out",
        ])
        .arg(&cpath)
        .output()
        .unwrap()
        .status
        .code();
    assert_eq!(code, Some(0));
    let parsed: qccr::export::CliffordExport =
        serde_json::from_str(&std::fs::read_to_string(&cpath).unwrap()).unwrap();
    assert_eq!(parsed.r, 3);
    assert_eq!(parsed.dim, 4);
    let mats = qccr::export::load_clifford_matrices(&parsed).unwrap();
    assert_eq!(mats.len(), 3);
    std::fs::remove_dir_all(&dir).ok();
}
