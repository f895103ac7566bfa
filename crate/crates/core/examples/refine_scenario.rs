//! The improvement loop: run a policy, score its rules against ratings,
//! drop the rules that do not discriminate, and run again.

use serde_json::json;
use sheet_workbench::evaluation::{evaluate_rules, ExpertRating, Rating};
use sheet_workbench::model::fixture::from_fixture_str;
use sheet_workbench::model::Workbook;
use sheet_workbench::policy::{run_scenario, Registry};

/// Every book hard-codes a rate; only the poor ones have a stray blank.
fn book(i: usize, poor: bool) -> Workbook {
    let mut cells = serde_json::Map::new();
    for r in 1..=4 {
        cells.insert(format!("A{r}"), json!({ "value": r * i }));
        cells.insert(format!("B{r}"), json!({ "formula": format!("=A{r}*1.19") }));
    }
    if poor {
        cells.insert("C9".into(), json!({ "value": " " }));
    }
    let id = format!("book-{i}");
    let doc = json!({ "id": id, "sheets": [{ "name": "S", "protection_enabled": true, "cells": cells }] });
    from_fixture_str(&doc.to_string(), &id).unwrap()
}

fn main() {
    let books: Vec<Workbook> = (1..=8).map(|i| book(i, i % 2 == 0)).collect();
    let ratings: Vec<ExpertRating> = (1..=8)
        .map(|i| ExpertRating::new(&format!("book-{i}"), "expert", if i % 2 == 0 { Rating::Poor } else { Rating::Good }))
        .collect();

    let mut scenario = Registry::builtin().full_scenario("refined");
    for round in 1..=2 {
        let run = run_scenario(&scenario, &books).unwrap();
        let result = evaluate_rules(std::slice::from_ref(&run), &ratings).unwrap();
        println!("round {round}: {} findings", run.findings.len());
        for id in &result.ranking {
            let m = result.rule(id).unwrap();
            println!("  {:<28} mcc {:+.2}{}", id, m.mcc, if m.perfect { "  perfect" } else { "" });
        }
        for m in &result.rules {
            if m.mcc <= 0.0 {
                scenario.checker_mut(&m.checker_id).unwrap().enabled = false;
            }
        }
    }
    let kept: Vec<&str> = scenario.enabled_checkers().map(|c| c.checker_id.as_str()).collect();
    println!("\nrefined scenario keeps {kept:?}");
}
