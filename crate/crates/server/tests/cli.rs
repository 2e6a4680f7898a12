use std::path::PathBuf;
use std::process::{Command, Output};

use humboldt_core::testkit::{
    AIRLINES_ID, DELAYS_WORKBOOK_ID, FIXTURE_CATALOG, FIXTURE_SPEC, JOINABLE_PROVIDER_TEXT, REVENUE_WORKBOOK_ID,
};
use tempfile::TempDir;

struct Files {
    _dir: TempDir,
    spec: PathBuf,
    catalog: PathBuf,
}

fn files(spec: &str) -> Files {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    let catalog_path = dir.path().join("catalog.json");
    std::fs::write(&spec_path, spec).unwrap();
    std::fs::write(&catalog_path, FIXTURE_CATALOG).unwrap();
    Files { _dir: dir, spec: spec_path, catalog: catalog_path }
}

fn humboldt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_humboldt")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_accepts_the_fixture_and_a_bare_provider() {
    let f = files(FIXTURE_SPEC);
    let out = humboldt(&["validate", f.spec.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("ok (11 providers)"));

    let f = files(JOINABLE_PROVIDER_TEXT);
    let out = humboldt(&["validate", f.spec.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn validate_reports_violations() {
    let f = files(r#"{"providers": [{"type": "t", "name": "", "representation": "LIST", "endpoint": "x"}]}"#);
    let out = humboldt(&["validate", f.spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stdout(&out).contains("ok ("));

    let f = files("{not json");
    let out = humboldt(&["validate", f.spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn query_prints_ranked_ids() {
    let f = files(FIXTURE_SPEC);
    let args = ["query", "--spec", f.spec.to_str().unwrap(), "--catalog", f.catalog.to_str().unwrap()];
    let out = humboldt(&[&args[..], &["type: workbook owned_by: 'John Doe'"]].concat());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    // More views first.
    assert_eq!(stdout(&out), format!("{DELAYS_WORKBOOK_ID}\n{REVENUE_WORKBOOK_ID}\n"));

    let out = humboldt(&[&args[..], &["AIRLINES"]].concat());
    assert_eq!(stdout(&out), format!("{AIRLINES_ID}\n"));

    let out = humboldt(&[&args[..], &["nothing_matches_this"]].concat());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
}

#[test]
fn query_parse_error_exits_2_with_position() {
    let f = files(FIXTURE_SPEC);
    let out = humboldt(&[
        "query",
        "--spec",
        f.spec.to_str().unwrap(),
        "--catalog",
        f.catalog.to_str().unwrap(),
        "sales & (owned_by: 'x'",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).is_empty());
    let err = stderr(&out);
    assert!(err.contains("position: 22"), "{err}");
    assert!(err.lines().any(|l| l.trim_end().ends_with('^')), "{err}");
}

#[test]
fn missing_files_fail_cleanly() {
    let out = humboldt(&["query", "--spec", "/nonexistent/spec.json", "--catalog", "/nonexistent/c.json", "x"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error:"));
}
