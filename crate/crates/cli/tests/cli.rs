use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use meanfield_core::bounds::BoundReport;

fn meanfield(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_meanfield"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_reports(path: &Path) -> Vec<BoundReport> {
    fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn validate_accepts_a_well_formed_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ok.json", r#"{"experiment": "combineq", "seed": 3}"#);
    let out = meanfield(&["validate", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn validate_names_an_unknown_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"experiment": "vlasov-moment"}"#);
    let out = meanfield(&["validate", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("experiment: unknown experiment 'vlasov-moment'"), "{text}");
}

#[test]
fn validate_reports_the_doubled_grid_memory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "big.json",
        r#"{"experiment": "quantum-dobrushin", "params": {"grid_points": 128, "n_particles": [2]}}"#,
    );
    let out = meanfield(&["validate", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    // 16 bytes · 128⁴
    assert!(text.contains("params.grid_points") && text.contains("4294967296"), "{text}");
}

#[test]
fn memory_cap_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "q.json", r#"{"experiment": "quantum-dobrushin"}"#);
    assert_eq!(meanfield(&["validate", &cfg], &[]).status.code(), Some(0));
    let out = meanfield(&["validate", &cfg], &[("MEANFIELD_MEMORY_CAP_BYTES", "1000000")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stdout).unwrap().contains("cap is 1000000"));
}

#[test]
fn run_refuses_an_invalid_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"experiment": "combineq", "params": {"p": 0.5}}"#);
    let out = meanfield(&["run", &cfg, "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("params.p"));
}

#[test]
fn ot_selftest_passes_and_writes_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ot.json", r#"{"experiment": "ot-selftest", "seed": 11}"#);
    let out = meanfield(&["run", &cfg, "--out", dir.path().to_str().unwrap(), "--jobs", "2"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports = read_reports(&dir.path().join("ot-selftest.jsonl"));
    assert_eq!(reports.len(), 100);
    assert!(reports.iter().all(|r| r.pass));
    let csv = fs::read_to_string(dir.path().join("ot-selftest.csv")).unwrap();
    assert!(csv.starts_with("inequality_id,t,lhs,rhs,margin\n"));
    assert_eq!(csv.lines().count(), 101);
    assert!(dir.path().join("ot-selftest.log").exists());
}

#[test]
fn same_seed_gives_identical_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write_config(dir.path(), "c.json", r#"{"experiment": "combineq", "seed": 5, "params": {"mc_samples": 5000}}"#);
    let run = |sub: &str, extra: &[&str]| {
        let out_dir = dir.path().join(sub);
        let mut args = vec!["run", cfg.as_str(), "--out", out_dir.to_str().unwrap()];
        args.extend_from_slice(extra);
        let out = meanfield(&args, &[]);
        assert!(out.status.code().is_some());
        fs::read(out_dir.join("combineq.jsonl")).unwrap()
    };
    let a = run("a", &["--jobs", "1"]);
    let b = run("b", &["--jobs", "3"]);
    let c = run("c", &["--seed", "6"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn free_classical_flow_passes_within_the_noise_band() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "free.json",
        r#"{"experiment": "classical-dobrushin", "seed": 2,
            "potential": {"family": "zero"},
            "params": {"n_particles": [4, 8], "coupled_samples": 200, "reference_size": 500,
                       "subsample_size": 50, "subsample_repeats": 4, "times": [0.5], "dt": 0.05}}"#,
    );
    let out = meanfield(&["run", &cfg, "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports = read_reports(&dir.path().join("classical-dobrushin.jsonl"));
    assert_eq!(reports.len(), 4);
    for r in &reports {
        assert_eq!(r.rhs, 0.0);
        assert!(r.pass);
    }
    let d: Vec<_> = reports.iter().filter(|r| r.inequality_id == "dobrushin-classical").collect();
    assert!(d.iter().all(|r| r.lhs_measured == 0.0));
}

#[test]
fn boundary_guard_trip_fails_the_run() {
    let dir = tempfile::tempdir().unwrap();
    // the packet starts well inside the guard band and drifts out by t = 1.5
    let cfg = write_config(
        dir.path(),
        "drift.json",
        r#"{"experiment": "quantum-dobrushin",
            "params": {"n_particles": [1], "epsilons": [0.5], "grid_points": 64, "box_half_width": 8.0,
                       "center": [0.0, 2.5], "dt": 0.01, "times": [0.0, 1.5]}}"#,
    );
    assert_eq!(meanfield(&["validate", &cfg], &[]).status.code(), Some(0));
    let out = meanfield(&["run", &cfg, "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("guard tripped"));
    let reports = read_reports(&dir.path().join("quantum-dobrushin.jsonl"));
    let last = reports.last().unwrap();
    assert_eq!(last.inequality_id, "guard-boundary-mass");
    assert!(!last.pass);
    assert!(reports[..reports.len() - 1].iter().all(|r| r.time == 0.0));
}
