//! Runs the binary on fixed inputs and compares its JSONL output byte for byte with
//! `tests/golden/`. Set `QREP_BLESS=1` to rewrite the files after an intended change.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn qrep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrep"))
        .args(args)
        .output()
        .expect("failed to run qrep")
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn check(name: &str, args: &[&str]) {
    let out = qrep(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let path = golden_path(name);
    if std::env::var_os("QREP_BLESS").is_some() {
        std::fs::write(&path, &out.stdout).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap();
    let got = String::from_utf8(out.stdout).unwrap();
    assert_eq!(got, want, "{name} differs from golden output");
}

#[test]
fn signatures() {
    check("signatures_p7.jsonl", &["signatures", "--p", "7"]);
}

#[test]
fn blocks() {
    check("blocks_p7_sphere4.jsonl", &["blocks", "--p", "7", "--labels", "2,2,2,2"]);
}

#[test]
fn equiv() {
    check("equiv_p5.jsonl", &["equiv", "--p", "5"]);
}

#[test]
fn reduce() {
    check("reduce_p7_q13.jsonl", &["reduce", "--p", "7", "--q", "13", "--projective"]);
}

#[test]
fn reduce_with_lift() {
    check(
        "reduce_p5_q11_k2.jsonl",
        &["reduce", "--p", "5", "--q", "11", "--k", "2", "--projective"],
    );
}

#[test]
fn gap() {
    check("gap_p7_q13.jsonl", &["gap", "--p", "7", "--q", "13", "--projective"]);
}

#[test]
fn quasi() {
    check("quasi_p7.jsonl", &["quasi", "--p", "7", "--word", "1.2.-1", "--n-max", "4096"]);
}

#[test]
fn every_record_has_the_envelope() {
    for entry in std::fs::read_dir(golden_path("")).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        for line in text.lines() {
            let v: Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["schema_version"], 1);
            for key in ["command", "params", "result"] {
                assert!(v.get(key).is_some(), "missing {key} in {line}");
            }
        }
    }
}

#[test]
fn out_flag_writes_the_same_records() {
    let dir = std::env::temp_dir().join(format!("qrep-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("equiv.jsonl");
    let out = qrep(&["equiv", "--p", "5", "--out", file.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let got = std::fs::read_to_string(&file).unwrap();
    assert_eq!(got, std::fs::read_to_string(golden_path("equiv_p5.jsonl")).unwrap());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn jobs_do_not_change_output() {
    let one = qrep(&["--jobs", "1", "quasi", "--p", "11", "--word", "1.2", "--n-max", "1024"]);
    let many = qrep(&["--jobs", "4", "quasi", "--p", "11", "--word", "1.2", "--n-max", "1024"]);
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn identity_word_has_zero_rotation() {
    let out = qrep(&["quasi", "--p", "7", "--word", "e", "--n-max", "1024"]);
    assert!(out.status.success());
    for line in String::from_utf8(out.stdout).unwrap().lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert!(v["result"]["rotation"]["value"].as_f64().unwrap().abs() < 1e-12);
    }
}

fn exit_code(args: &[&str]) -> i32 {
    qrep(args).status.code().unwrap()
}

#[test]
fn validation_failures_exit_2() {
    assert_eq!(exit_code(&["signatures", "--p", "6"]), 2);
    assert_eq!(exit_code(&["signatures", "--p", "13"]), 2);
    assert_eq!(exit_code(&["reduce", "--p", "7", "--q", "1000003"]), 2);
    assert_eq!(exit_code(&["reduce", "--p", "7", "--q", "15"]), 2);
    assert_eq!(exit_code(&["reduce", "--p", "7", "--q", "7"]), 2);
    assert_eq!(exit_code(&["quasi", "--p", "7", "--word", "1.x"]), 2);
    assert_eq!(exit_code(&["quasi", "--p", "7", "--word", "1.9"]), 2);
    // the compact class at p = 7 has no indefinite model
    assert_eq!(exit_code(&["quasi", "--p", "7", "--word", "1", "--class", "2"]), 2);
    assert_eq!(exit_code(&["blocks", "--p", "7", "--labels", "1,1,1,9"]), 2);
}

#[test]
fn exhausted_budgets_exit_3() {
    let out = qrep(&["reduce", "--p", "7", "--q", "13", "--projective", "--state-budget", "100"]);
    assert_eq!(out.status.code(), Some(3));
    // the partial report is still written
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["closure"]["truncated"], true);
    assert_eq!(v["result"]["closure"]["verdict"], "Unknown");
    let gap = qrep(&["gap", "--p", "7", "--q", "13", "--projective", "--spectral-budget", "10"]);
    assert_eq!(gap.status.code(), Some(3));
}
