//! One run, several views: filtered, grouped, JSON and text.

use std::path::PathBuf;

use sheet_workbench::model::load_workbook;
use sheet_workbench::policy::{run_scenario, Scenario, Severity};
use sheet_workbench::report::{group_findings, serialize_report, FilterSpec, GroupKey, OutputFormat, Report};

fn main() {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let scenario = Scenario::load(fixtures.join("scenarios/all_practices.json")).unwrap();
    let books: Vec<_> = ["messy.json", "two_defects.json", "clean.json"]
        .iter()
        .map(|n| load_workbook(fixtures.join(n), None).unwrap())
        .collect();
    let run = run_scenario(&scenario, &books).unwrap();
    println!("run {} found {} issues\n", run.run_id, run.findings.len());

    for key in [GroupKey::ByChecker, GroupKey::ByWorkbook] {
        println!("{key}:");
        for g in group_findings(&run.findings, key) {
            println!("  {:<28} {}", g.label, g.findings.len());
        }
    }

    let spec = FilterSpec::default()
        .workbook("sales-tracker")
        .sheet(0)
        .range("A1:C10".parse().unwrap())
        .severity(Severity::Warning);
    let report = Report::build(&run, &spec, GroupKey::ByCell);
    println!("\nsales-tracker, first sheet, A1:C10, warnings only:");
    serialize_report(&report, OutputFormat::Text, &mut std::io::stdout()).unwrap();

    let json = report.to_json_pretty();
    let back = Report::from_json_str(&json).unwrap();
    assert_eq!(back, report);
    println!("\nJSON report: {} bytes, top-level keys {:?}", json.len(), {
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        v.as_object().unwrap().keys().cloned().collect::<Vec<_>>()
    });
}
