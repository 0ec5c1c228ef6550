use std::io::Write;
use std::process::Command;

use magic_rect::cli::{format_grid, parse_document, parse_grid, run_with_env, MrsDocument};
use magic_rect::{construct, verify_mrs, AbelianGroup};

fn run(args: &[&str]) -> magic_rect::cli::CliOutput {
    run_with_env(std::iter::once("mrs").chain(args.iter().copied()), None)
}

fn file_with(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn build_then_verify_round_trips() {
    for (spec, shape) in [
        ("Z3xZ3", "3x3x1"),
        ("Z4", "2x2"),
        ("Z2xZ2xZ3", "2x2x3"),
        ("Z3xZ2xZ2", "3x4x1"),
        ("Z5xZ5", "5x5"),
        ("Z3xZ4xZ4", "3x4x4"),
        ("Z2xZ4xZ3", "2x2x6"),
    ] {
        let built = run(&["build", "--group", spec, "--shape", shape]);
        assert_eq!(built.code, 0, "{spec} {shape}: {}", built.stderr);
        let file = file_with(&built.stdout);
        let checked = run(&["verify", file.path().to_str().unwrap()]);
        assert_eq!(checked.code, 0, "{spec} {shape}: {}", checked.stdout);
        assert_eq!(checked.stdout.trim(), r#"{"valid":true}"#);
    }
}

#[test]
fn corrupted_document_fails_verification() {
    let built = run(&["build", "--group", "Z3xZ3", "--shape", "3x3x1"]);
    let mut doc = MrsDocument::from_json(&built.stdout).unwrap();
    doc.rectangles[0][1][2] = doc.rectangles[0][0][0].clone();
    let file = file_with(&doc.to_json());
    let out = run(&["verify", file.path().to_str().unwrap()]);
    assert_eq!(out.code, 1);
    let report: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(report["valid"], false);
    assert_eq!(report["failure"]["rectangle"], 0);
    assert_eq!(report["failure"]["row"], 1);
    assert_eq!(report["failure"]["column"], 2);
}

#[test]
fn grid_and_json_describe_the_same_instance() {
    let json = run(&["build", "--group", "Z3xZ4xZ4", "--shape", "4x3x4"]);
    let grid = run(&["build", "--group", "Z3xZ4xZ4", "--shape", "4x3x4", "--format", "grid"]);
    assert_eq!((json.code, grid.code), (0, 0));
    let from_json = parse_document(&json.stdout).unwrap();
    let from_grid = parse_grid(&grid.stdout).unwrap();
    assert_eq!(from_json, from_grid);
    assert!(verify_mrs(&from_grid).is_valid());
}

#[test]
fn grid_files_verify() {
    let m = construct(3, 3, 1, &AbelianGroup::parse("Z3xZ3").unwrap()).unwrap();
    let text = format_grid(&m);
    assert!(text.contains("omega (0,0)"));
    let file = file_with(&text);
    assert_eq!(run(&["verify", file.path().to_str().unwrap()]).code, 0);
    let broken = file_with(&text.replacen("(0,0)", "(7,0)", 3));
    assert_eq!(run(&["verify", broken.path().to_str().unwrap()]).code, 1);
    let garbage = file_with("group Z3\nshape 3\n");
    assert_eq!(run(&["verify", garbage.path().to_str().unwrap()]).code, 2);
}

#[test]
fn verdict_exit_codes() {
    let out = run(&["build", "--group", "Z6", "--shape", "3x2x1"]);
    assert_eq!(out.code, 3);
    assert!(out.stdout.contains("\"odd\""));
    assert_eq!(run(&["build", "--group", "Z3xZ2xZ4", "--shape", "3x2x4"]).code, 4);
    assert_eq!(run(&["search", "--group", "Z6", "--shape", "3x2x1"]).code, 3);
    let found = run(&["search", "--group", "Z4", "--shape", "2x2x1"]);
    assert_eq!(found.code, 0);
    let v: serde_json::Value = serde_json::from_str(&found.stdout).unwrap();
    assert_eq!(v["result"], "Found");
    assert!(v["witness"]["rectangles"].is_array());
}

#[test]
fn sums_and_tables() {
    let out = run(&["sums", "--group", "Z4", "--shape", "2x2x1"]);
    assert_eq!(out.code, 0);
    assert_eq!(
        out.stdout.trim(),
        r#"{"complete":true,"pairs":[{"delta":[3],"omega":[1]},{"delta":[1],"omega":[3]}]}"#
    );
    let table = run(&["table", "--max-order", "6"]);
    let mut lines = table.stdout.lines();
    assert_eq!(lines.next(), Some("group,a,b,c,status,reason"));
    assert!(table.stdout.contains("Z2xZ3,3,2,1,NotExists,odd"));
    let open = run(&["open-cases", "--max-order", "24"]);
    assert!(open.stdout.contains("Z2xZ4xZ3,3,2,4,Open,open-case-1"));
}

#[test]
fn binary_reports_errors_as_json_lines() {
    let exe = env!("CARGO_BIN_EXE_mrs");
    let out = Command::new(exe)
        .args(["decide", "--group", "Z6", "--shape", "3x2x1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), r#"{"status":"NotExists","reason":"odd"}"#);

    let out = Command::new(exe).args(["decide", "--group", "nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.lines().count(), 1);
    assert!(serde_json::from_str::<serde_json::Value>(&err).is_ok());

    let out = Command::new(exe)
        .args(["search", "--group", "Z3xZ2xZ2", "--shape", "3x2x2"])
        .env("MRK_BUDGET", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5));
}
