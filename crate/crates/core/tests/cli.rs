//! The `workbench` binary end to end.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use sheet_workbench::cli::EvaluationDocument;
use sheet_workbench::report::Report;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn workbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_workbench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Report text with the wall-clock timestamps blanked.
fn without_timestamps(text: &str) -> Value {
    let mut v: Value = serde_json::from_str(text).unwrap();
    v["run"]["started_at"] = Value::Null;
    v["run"]["finished_at"] = Value::Null;
    v
}

#[test]
fn exit_codes() {
    let quarterly = fixture("scenarios/quarterly.json");
    let o = workbench(&["analyze", &quarterly, &fixture("quarterly.json")]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let report = Report::from_json_str(&stdout(&o)).unwrap();
    assert_eq!(report.findings.len(), 2);

    let o = workbench(&["analyze", &quarterly, &fixture("clean.json")]);
    assert_eq!(o.status.code(), Some(0));

    let o = workbench(&["analyze", &fixture("scenarios/invalid.json"), &fixture("clean.json")]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("min_uses") && err.contains("no-such-rule"), "{err}");
    assert!(o.stdout.is_empty());

    let o = workbench(&["analyze", &quarterly, "/does/not/exist.xlsx"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: "));

    assert_eq!(workbench(&["analyze", &quarterly]).status.code(), Some(2));
    assert_eq!(workbench(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(workbench(&["--help"]).status.code(), Some(0));
}

#[test]
fn filtered_clean_result_exits_zero() {
    let o = workbench(&[
        "analyze",
        &fixture("scenarios/quarterly.json"),
        &fixture("quarterly.json"),
        "--filter",
        "severity=info",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(Report::from_json_str(&stdout(&o)).unwrap().findings.is_empty());
}

#[test]
fn repeated_runs_are_byte_identical_apart_from_timestamps() {
    let args = [
        "analyze",
        &fixture("scenarios/all_practices.json"),
        &fixture("messy.json"),
        &fixture("quarterly.json"),
        "--group",
        "by_cell",
    ];
    let a = workbench(&args);
    let b = workbench(&args);
    assert_eq!(without_timestamps(&stdout(&a)), without_timestamps(&stdout(&b)));
    let strip = |s: String| -> String {
        s.lines().filter(|l| !l.contains("started_at") && !l.contains("finished_at")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(strip(stdout(&a)), strip(stdout(&b)));
}

#[test]
fn out_file_filters_and_text_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let out = out.to_str().unwrap();
    let o = workbench(&[
        "analyze",
        &fixture("scenarios/all_practices.json"),
        &fixture("messy.json"),
        "--out",
        out,
        "--filter",
        "checker=blank-only-cells,constants-in-formulae",
        "--filter",
        "range=A1:D10",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let report = Report::from_json_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!(!report.findings.is_empty());
    for f in &report.findings {
        assert!(["blank-only-cells", "constants-in-formulae"].contains(&f.checker_id.as_str()));
        let c = f.cell().unwrap();
        assert!(c.column <= 3 && c.row <= 9);
    }

    let o = workbench(&["analyze", &fixture("scenarios/quarterly.json"), &fixture("quarterly.json"), "--format", "text"]);
    let text = stdout(&o);
    assert!(text.contains("Revenue!E2") && text.contains("Revenue!E6"), "{text}");
    assert_eq!(
        workbench(&["analyze", &fixture("scenarios/quarterly.json"), &fixture("quarterly.json"), "--filter", "colour=red"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn eval_from_saved_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("all.json");
    let out = out.to_str().unwrap();
    let o = workbench(&[
        "analyze",
        &fixture("scenarios/all_practices.json"),
        &fixture("messy.json"),
        &fixture("clean.json"),
        &fixture("two_defects.json"),
        &fixture("quarterly.json"),
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));

    let ratings = fixture("ratings.json");
    let o = workbench(&["eval", out, "--ratings", &ratings]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("3 rated workbooks") && text.contains("1 undecided"), "{text}");

    let o = workbench(&["eval", out, "--ratings", &ratings, "--format", "json"]);
    let doc: EvaluationDocument = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc.evaluation.rated_workbooks, 3);
    assert_eq!(doc.evaluation.undecided_workbooks, ["quarterly-2024"]);
    assert_eq!(doc.run_ids.len(), 1);
    assert!(!doc.evaluation.cell_matches.is_empty());

    let o = workbench(&[
        "analyze",
        &fixture("scenarios/all_practices.json"),
        &fixture("messy.json"),
        &fixture("clean.json"),
        &fixture("two_defects.json"),
        &fixture("quarterly.json"),
        "--ratings",
        &ratings,
    ]);
    let embedded = Report::from_json_str(&stdout(&o)).unwrap().evaluation.unwrap();
    assert_eq!(embedded, doc.evaluation);

    let o = workbench(&["eval", out, "--ratings", &fixture("clean.json")]);
    assert_eq!(o.status.code(), Some(2));
    let partial = workbench(&[
        "analyze",
        &fixture("scenarios/all_practices.json"),
        &fixture("clean.json"),
        "--ratings",
        &ratings,
    ]);
    assert_eq!(partial.status.code(), Some(2), "ratings for unanalyzed workbooks are rejected");
}

#[test]
fn checkers_listing() {
    let o = workbench(&["checkers"]);
    assert_eq!(o.status.code(), Some(0));
    let list: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(list.as_array().unwrap().len(), 5);
    assert!(list[0]["param_schema"].is_array());
}
