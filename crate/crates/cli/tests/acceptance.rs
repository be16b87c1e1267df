//! Acceptance criterion 10: two runs of `verify-all` produce byte-identical
//! numeric payloads (every CSV and every quantum/weyl report).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

fn rfl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rfl"))
}

/// Collect the numeric payload files under a run directory, keyed by their
/// path relative to the root. `report.json` carries wall-clock metadata and
/// is not part of the payload.
fn payload_files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let name = path.file_name().unwrap().to_string_lossy().to_string();
            let is_payload = name.ends_with(".csv")
                || name == "quantum_report.json"
                || name == "weyl_report.json";
            if is_payload {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn criterion_10_verify_all_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (run_a, run_b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&run_a, &run_b] {
        let status = rfl()
            .args(["verify-all", "--output", dir.to_str().unwrap()])
            .status()
            .unwrap();
        assert!(status.success(), "verify-all failed in {dir:?}");
    }
    let (a, b) = (payload_files(&run_a), payload_files(&run_b));
    assert!(!a.is_empty(), "verify-all produced no numeric payloads");
    assert_eq!(
        a.keys().collect::<Vec<_>>(),
        b.keys().collect::<Vec<_>>(),
        "payload file sets differ"
    );
    let mut mismatched = Vec::new();
    for (rel, bytes) in &a {
        if b[rel] != *bytes {
            mismatched.push(rel.clone());
        }
    }
    println!(
        "acceptance 10 (determinism): {} — {} payload files byte-identical across two verify-all runs",
        if mismatched.is_empty() { "PASS" } else { "FAIL" },
        a.len()
    );
    assert!(mismatched.is_empty(), "payloads differ: {mismatched:?}");
}
