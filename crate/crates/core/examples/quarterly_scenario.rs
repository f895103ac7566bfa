//! Check a quarterly report against the "quarterly financial reports"
//! policy: reused constants other than 1, and unprotected formulas.

use std::path::PathBuf;

use sheet_workbench::model::load_workbook;
use sheet_workbench::policy::{run_scenario, Scenario};
use sheet_workbench::report::{render_text, FilterSpec, GroupKey, Report};

fn main() {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let scenario = Scenario::load(fixtures.join("scenarios/quarterly.json")).unwrap();
    println!("scenario {:?}:", scenario.name);
    for c in scenario.enabled_checkers() {
        println!("  {} ({}) {:?}", c.checker_id, c.severity, c.params);
    }
    let book = load_workbook(fixtures.join("quarterly.json"), None).unwrap();
    let run = run_scenario(&scenario, &[book]).unwrap();
    println!();
    print!("{}", render_text(&Report::build(&run, &FilterSpec::default(), GroupKey::ByCell)));
}
