//! End-to-end runs of the `rfl` binary: the flow → entropy pipeline over the
//! filesystem, report formats, and the documented exit codes
//! (0 pass, 1 assertion failure, 2 config error).

use std::path::Path;
use std::process::Command;

fn rfl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rfl"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn flow_entropy_pipeline_torus() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("torus.cfg");
    // 16² torus, a handful of steps, CFL-safe dt = 0.5·h²/4 with h = 2π/16
    write(
        &cfg,
        "nx = 16\nny = 16\nlx = 6.283185307179586\nly = 6.283185307179586\n\
         dt = 0.01\nt_end = 0.12\ncfl_limit = 1.0\nu0_expr = bump1\n",
    );
    let out = tmp.path().join("run");
    let status = rfl()
        .args(["flow", "--geometry", "torus", "--config"])
        .arg(&cfg)
        .arg("--output")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("times.csv").is_file());
    assert!(out.join("trajectory/0.csv").is_file());
    assert!(out.join("trajectory/12.csv").is_file());

    let status = rfl()
        .args(["entropy", "--trajectory"])
        .arg(&out)
        .args(["--f-end", "vonmises", "--output"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("functionals.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,F,N,mass,RHS13,dNdt,dFdt,res_N,res_F");
    assert_eq!(lines.count(), 13);
}

#[test]
fn flow_entropy_pipeline_sphere() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("sphere.cfg");
    write(&cfg, "r0 = 1.0\ndt = 1e-3\nt_end = 0.05\n");
    let out = tmp.path().join("run");
    let status = rfl()
        .args(["flow", "--geometry", "sphere", "--config"])
        .arg(&cfg)
        .arg("--output")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let status = rfl()
        .args(["entropy", "--trajectory"])
        .arg(&out)
        .args(["--f-end", "uniform", "--output"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("functionals.csv").is_file());
}

#[test]
fn unknown_config_key_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    write(&cfg, "nx = 16\nny = 16\nlx = 1\nly = 1\ndt = 1e-6\nt_end = 1e-5\nwiggle = 3\n");
    let status = rfl()
        .args(["flow", "--geometry", "torus", "--config"])
        .arg(&cfg)
        .arg("--output")
        .arg(tmp.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn cfl_violating_config_exits_2_before_stepping() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfl.cfg");
    // h²/4 = 9.8e−7 at 16² on the unit torus; dt = 1e−3 violates it
    write(&cfg, "nx = 16\nny = 16\nlx = 1\nly = 1\ndt = 1e-3\nt_end = 0.01\nu0_expr = flat\n");
    let out = tmp.path().join("out");
    let status = rfl()
        .args(["flow", "--geometry", "torus", "--config"])
        .arg(&cfg)
        .arg("--output")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    assert!(!out.join("times.csv").exists(), "no artifacts before the guard");
}

#[test]
fn quantum_subcommand_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("quantum_report.json");
    let status = rfl()
        .args(["quantum", "--case", "gaussian", "--n", "512", "--report"])
        .arg(&report)
        .arg("--output")
        .arg(tmp.path().join("out"))
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("\"lhs\""));
    assert!(text.contains("\"rhs\""));
}

#[test]
fn weyl_subcommand_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("weyl_report.json");
    let status = rfl()
        .args(["weyl", "--density", "bump1", "--n", "64", "--seed", "3", "--report"])
        .arg(&report)
        .arg("--output")
        .arg(tmp.path().join("out"))
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("two_ways_discrepancy"));
}

#[test]
fn report_subcommand_reads_back_summaries() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let status = rfl()
        .args(["weyl", "--density", "uniform", "--n", "32", "--output"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let output = rfl().args(["report", "--dir"]).arg(&out).output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("PASS weyl-uniform"));
}

#[test]
fn report_with_failing_summary_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let status = rfl()
        .args(["weyl", "--density", "uniform", "--n", "32", "--output"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    // tamper the stored report into a failure
    let report = out.join("weyl-uniform/report.json");
    let text = std::fs::read_to_string(&report).unwrap();
    std::fs::write(&report, text.replace("\"pass\": true", "\"pass\": false")).unwrap();
    let status = rfl().args(["report", "--dir"]).arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn env_var_sets_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("envroot");
    let status = rfl()
        .env("RFL_OUTPUT_DIR", &root)
        .args(["weyl", "--density", "uniform", "--n", "32"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(root.join("weyl-uniform/report.json").is_file());
}
