mod common;

use std::fs;
use std::process::Command;

use common::*;

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_without_separator_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = provcap(dir.path(), &["run", "true"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(top_level(dir.path()).is_empty());
}

#[test]
fn dot_file_written_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let out = provcap(dir.path(), &["run", "--dot", "--", "sh", "-c", "echo hi > out.txt"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let dot = fs::read_to_string(dir.path().join("prov_0/provenance.dot")).unwrap();
    assert!(dot.starts_with("digraph provenance {"));
    assert!(dot.contains("outputs/out.txt"));
    assert_eq!(fs::read(dir.path().join("prov_0/outputs/out.txt")).unwrap(), b"hi\n");
}

#[test]
fn child_status_is_propagated_and_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = provcap(dir.path(), &["run", "--", "sh", "-c", "exit 7"]);
    assert_eq!(code(&out), 7);
    let prov = read_json(&dir.path().join("prov_0/provenance.json"));
    assert_eq!(prov["activity"]["yProv4DA:experiment_run"]["yprov:exit_status"], "7");
}

#[test]
fn missing_program_exits_127() {
    let dir = tempfile::tempdir().unwrap();
    let out = provcap(dir.path(), &["run", "--", "./no-such-program"]);
    assert_eq!(code(&out), 127, "{}", stderr(&out));
}

#[test]
fn reserved_prefix_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = provcap(dir.path(), &["run", "--prefix", "prov", "--", "true"]);
    assert_eq!(code(&out), 2);
    assert!(top_level(dir.path()).is_empty());
}

#[test]
fn svg_without_renderer_fails_before_running() {
    if which_dot() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let out = provcap(dir.path(), &["run", "--svg", "--", "sh", "-c", "touch ran"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("dot"), "{}", stderr(&out));
    assert!(!dir.path().join("ran").exists());
}

fn which_dot() -> bool {
    Command::new("dot").arg("-V").output().is_ok()
}

#[test]
fn standalone_json_beside_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = provcap(dir.path(), &["run", "--json", "--", "sh", "-c", "echo x > o.txt"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        fs::read(dir.path().join("prov_0.json")).unwrap(),
        fs::read(dir.path().join("prov_0/provenance.json")).unwrap()
    );
}

#[test]
fn log_subcommand_inside_a_run() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("data.txt"), "d").unwrap();
    let script = format!(
        "{} log input data.txt && {} log end-run first && echo y > y.txt",
        bin(),
        bin()
    );
    let out = provcap(dir.path(), &["run", "--", "sh", "-c", &script]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let first = read_json(&dir.path().join("prov_0/provenance.json"));
    assert!(first["activity"]["yProv4DA:first"].is_object());
    assert_eq!(first["entity"]["yProv4DA:inputs/data.txt"]["yprov:logged_by"], "user");
    assert!(dir.path().join("prov_1").is_dir());
}

#[test]
fn log_outside_a_run_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = provcap(dir.path(), &["log", "input", "x"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("YPROV_CONTROL"));
}

#[test]
fn bundles_are_numbered_per_run() {
    let dir = tempfile::tempdir().unwrap();
    for _ in 0..3 {
        let out = provcap(dir.path(), &["run", "--no-rocrate", "--", "true"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    assert_eq!(top_level(dir.path()), ["prov_0", "prov_1", "prov_2"]);
    assert!(!dir.path().join("prov_0/ro-crate-metadata.json").exists());
}
