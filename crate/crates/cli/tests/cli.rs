use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn verify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verify")).args(args).output().expect("binary runs")
}

fn verify_json(args: &[&str], dir: &Path, name: &str) -> (i32, Value) {
    let path = dir.join(name);
    let mut all: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap();
    all.extend(["--json", p]);
    let out = verify(&all);
    let report = serde_json::from_str(&std::fs::read_to_string(&path).expect("report written")).unwrap();
    (out.status.code().unwrap(), report)
}

fn claims_without_timing(report: &Value) -> Value {
    report["claims"].clone()
}

#[test]
fn base2_passes_with_schema() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = verify_json(&["base2", "--max", "1024"], dir.path(), "b.json");
    assert_eq!(code, 0);
    assert_eq!(report["suite"], "base2");
    assert!(report["elapsed_ms"].is_u64());
    let claims = report["claims"].as_array().unwrap();
    assert_eq!(claims.len(), 11);
    for c in claims {
        for key in ["id", "paper_ref", "params", "status", "witness"] {
            assert!(c.get(key).is_some(), "missing {key}");
        }
        assert_eq!(c["status"], "pass");
    }
}

#[test]
fn series_single_case_lists_each_l() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = verify_json(&["series", "--n", "3", "--a", "1", "--b", "2", "--order", "32"], dir.path(), "s.json");
    assert_eq!(code, 0);
    let claims = report["claims"].as_array().unwrap();
    let alpha = claims.iter().find(|c| c["id"] == "alpha.valuation").unwrap();
    let entries = alpha["witness"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 32);
    // l = 7 has three binary ones
    assert_eq!(entries[6]["l"], 7);
    assert_eq!(entries[6]["actual"], "3/2");
}

#[test]
fn czero_level_five_with_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("m.txt");
    let (code, report) =
        verify_json(&["czero", "--level", "5", "--matrix-dump", dump.to_str().unwrap()], dir.path(), "c.json");
    assert_eq!(code, 0);
    assert_eq!(report["claims"][0]["witness"]["kernel_dimension"], 0);
    let text = std::fs::read_to_string(&dump).unwrap();
    let first: Vec<&str> = text.lines().next().unwrap().split(' ').collect();
    assert_eq!(first.len(), 3);
}

#[test]
fn czero_level_two_reports_failure() {
    let out = verify(&["czero", "--level", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL czero.kernel_zero"));
}

#[test]
fn invalid_configuration_exits_two() {
    for args in [
        &["series", "--n", "3", "--a", "2", "--b", "2"][..],
        &["series", "--a", "1", "--b", "2"],
        &["series", "--n", "3", "--a", "1"],
        &["galois", "--n", "3", "--chi", "4"],
        &["beta", "--n", "3", "--order", "16"],
        &["czero", "--level", "0"],
        &["base2", "--jobs", "0"],
        &["frobnicate"],
    ] {
        assert_eq!(verify(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn galois_and_beta_on_one_case() {
    assert_eq!(verify(&["galois", "--n", "3", "--a", "1", "--b", "2", "--chi", "3,5"]).status.code(), Some(0));
    assert_eq!(verify(&["beta", "--n", "3", "--a", "1", "--b", "2", "--chi", "3"]).status.code(), Some(0));
}

#[test]
fn transition_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["transition", "--seed", "7", "--samples", "20"];
    let (c1, r1) = verify_json(&args, dir.path(), "t1.json");
    let (c2, r2) = verify_json(&args, dir.path(), "t2.json");
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(r1["config"]["seed"], 7);
    assert_eq!(claims_without_timing(&r1), claims_without_timing(&r2));
    assert_eq!(r1["claims"].as_array().unwrap().len(), 20 * 7);
}

#[test]
fn job_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let (c1, r1) = verify_json(&["galois", "--n", "3", "--jobs", "1"], dir.path(), "g1.json");
    let out = Command::new(env!("CARGO_BIN_EXE_verify"))
        .args(["galois", "--n", "3", "--json", dir.path().join("g2.json").to_str().unwrap()])
        .env("VERIFY_JOBS", "3")
        .output()
        .unwrap();
    let r2: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("g2.json")).unwrap()).unwrap();
    assert_eq!((c1, out.status.code().unwrap()), (0, 0));
    assert_eq!(claims_without_timing(&r1), claims_without_timing(&r2));
}
