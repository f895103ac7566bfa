//! Score the built-in rules against expert ratings: which rules separate
//! the workbooks experts call poor from the good ones?

use std::path::PathBuf;

use sheet_workbench::evaluation::{aggregate_experts, evaluate_rules, match_error_cells, render_text, ExpertRating};
use sheet_workbench::model::load_workbook;
use sheet_workbench::policy::{run_scenario, Scenario};

fn main() {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let scenario = Scenario::load(fixtures.join("scenarios/all_practices.json")).unwrap();
    let books: Vec<_> = ["messy.json", "clean.json", "two_defects.json", "quarterly.json"]
        .iter()
        .map(|n| load_workbook(fixtures.join(n), None).unwrap())
        .collect();
    let ratings = ExpertRating::list_from_json_str(&std::fs::read_to_string(fixtures.join("ratings.json")).unwrap()).unwrap();

    let consensus = aggregate_experts(&ratings);
    println!("consensus: {:?}", consensus.decided);
    println!("split decisions (excluded): {:?}\n", consensus.undecided);

    let run = run_scenario(&scenario, &books).unwrap();
    let result = evaluate_rules(std::slice::from_ref(&run), &ratings).unwrap();
    print!("{}", render_text(&result));

    println!("\nagreement with the experts' error cells:");
    for m in match_error_cells(&run, &ratings).unwrap() {
        println!("  {:<28} hits {} misses {} spurious {}", m.checker_id, m.hits, m.misses, m.spurious);
    }
}
