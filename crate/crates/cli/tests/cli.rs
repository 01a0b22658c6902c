//! End-to-end tests of the command-line interface: output shapes, exit
//! codes, and byte-level determinism.

use std::io::Write;
use std::process::{Command, Output};

const HYPERBOLIC: &str = r#"{
  "field_disc": -4,
  "signature": [1, 1],
  "gram": [
    [{"re_num": 1, "re_den": 1, "omega_num": 0, "omega_den": 1},
     {"re_num": 0, "re_den": 1, "omega_num": 0, "omega_den": 1}],
    [{"re_num": 0, "re_den": 1, "omega_num": 0, "omega_den": 1},
     {"re_num": -1, "re_den": 1, "omega_num": 0, "omega_den": 1}]
  ]
}"#;

const NON_HERMITIAN: &str = r#"{
  "field_disc": -4,
  "signature": [1, 1],
  "gram": [
    [{"re_num": 1, "re_den": 1, "omega_num": 0, "omega_den": 1},
     {"re_num": 1, "re_den": 1, "omega_num": 1, "omega_den": 1}],
    [{"re_num": 0, "re_den": 1, "omega_num": 0, "omega_den": 1},
     {"re_num": -1, "re_den": 1, "omega_num": 0, "omega_den": 1}]
  ]
}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitheta"))
        .args(args)
        .output()
        .expect("spawn unitheta")
}

fn config_file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f.flush().unwrap();
    f
}

fn strip_wall_ms(s: &str) -> String {
    let mut out = String::new();
    let mut rest = s;
    while let Some(pos) = rest.find("\"wall_ms\":") {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos + "\"wall_ms\":".len()..];
        let end = tail
            .find(|c: char| c == ',' || c == '}')
            .unwrap_or(tail.len());
        out.push_str("\"wall_ms\":0");
        rest = &tail[end..];
    }
    out.push_str(rest);
    out
}

#[test]
fn verify_symbolic_sweep_prints_twelve_ok_lines() {
    let out = run(&["verify-symbolic", "--p-max", "2", "--q-max", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let ok_lines = text.lines().filter(|l| l.contains("status=OK")).count();
    assert_eq!(ok_lines, 12, "expected 4 pairs x 3 identity families:\n{text}");
    assert_eq!(text.lines().filter(|l| l.contains("status=FAIL")).count(), 0);
    assert!(text.lines().next().unwrap().contains("\"manifest\""));
    assert!(text.contains("(2,2) identity=main status=OK"));
}

#[test]
fn verify_symbolic_single_family_filter() {
    let out = run(&[
        "verify-symbolic",
        "--p-max",
        "2",
        "--q-max",
        "1",
        "--identity",
        "main",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("identity=main")).count(), 2);
    assert_eq!(text.lines().filter(|l| l.contains("identity=kinv")).count(), 0);
}

#[test]
fn non_hermitian_config_is_rejected_with_exit_3() {
    let cfg = config_file(NON_HERMITIAN);
    let out = run(&["lattice-info", cfg.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"error\""), "{text}");
    assert!(text.contains("hermitian"), "{text}");
}

#[test]
fn bruinier_parameter_outside_range_exits_3() {
    let cfg = config_file(HYPERBOLIC);
    let out = run(&[
        "green-bruinier",
        cfg.path().to_str().unwrap(),
        "--two-m",
        "2",
        "--s",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("range"), "{text}");
}

#[test]
fn unknown_subcommand_exits_2() {
    let out = run(&["does-not-exist"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn precision_override_beyond_native_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_unitheta"))
        .args(["verify-symbolic", "--p-max", "1", "--q-max", "1"])
        .env("UNITHETA_PRECISION_BITS", "64")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"error\""), "{text}");
}

#[test]
fn lattice_info_reports_invariants() {
    let cfg = config_file(HYPERBOLIC);
    let out = run(&["lattice-info", cfg.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["value"]["real_rank"], 4);
    assert_eq!(v["value"]["discriminant_group_order"], 16);
    assert!(v["manifest"]["config_digest"].as_str().unwrap().len() == 64);
}

#[test]
fn theta_output_is_byte_identical_across_worker_counts() {
    let cfg = config_file(HYPERBOLIC);
    let path = cfg.path().to_str().unwrap().to_string();
    let mut outputs = Vec::new();
    for workers in ["1", "4", "8"] {
        let out = run(&[
            "theta", &path, "--tau-re", "0.3", "--tau-im", "0.8", "--bound", "10",
            "--workers", workers,
        ]);
        assert_eq!(out.status.code(), Some(0));
        outputs.push(strip_wall_ms(&String::from_utf8(out.stdout).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn enumerate_lists_exact_rational_norms() {
    let cfg = config_file(HYPERBOLIC);
    let out = run(&[
        "enumerate",
        cfg.path().to_str().unwrap(),
        "--two-m",
        "2",
        "--bound",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let vectors = v["value"].as_array().unwrap();
    assert!(!vectors.is_empty());
    for vec in vectors {
        assert_eq!(vec["norm"], "2");
    }
}
