//! Add a checker of your own next to the built-in ones.

use serde_json::json;
use sheet_workbench::model::fixture::from_fixture_str;
use sheet_workbench::policy::{
    CheckerConfig, CheckerDescriptor, Finding, Location, ParamSpec, ParamType, Params, ParsedWorkbook, Registry,
    RuleChecker, Scenario,
};
use sheet_workbench::report::{render_text, FilterSpec, GroupKey, Report};

/// Reports formulas whose text is longer than `max_length` characters.
struct LongFormulas;

impl RuleChecker for LongFormulas {
    fn descriptor(&self) -> CheckerDescriptor {
        CheckerDescriptor {
            id: "long-formulas".into(),
            display_name: "Long formulas".into(),
            summary: "Formulas too long to review at a glance".into(),
            param_schema: vec![
                ParamSpec::new("max_length", ParamType::Int, json!(40), "Longest acceptable formula").at_least(1.0),
            ],
        }
    }

    fn check(&self, workbook: &ParsedWorkbook<'_>, params: &Params) -> Vec<Finding> {
        let limit = params.int("max_length") as usize;
        workbook
            .book
            .cells()
            .filter_map(|cell| {
                let source = cell.formula_source()?;
                (source.chars().count() > limit).then(|| {
                    Finding::new(
                        "long-formulas",
                        workbook.book,
                        Location::Cell { address: cell.address },
                        format!("Formula in {} has {} characters", workbook.book.label(cell.address), source.len()),
                        "Long formulas hide mistakes.",
                        "Split the calculation over helper cells.".into(),
                        vec![],
                    )
                })
            })
            .collect()
    }
}

fn main() {
    let mut registry = Registry::builtin();
    registry.register(LongFormulas).expect("id is free");
    println!("registered: {:?}", registry.list_checkers().iter().map(|d| &d.id).collect::<Vec<_>>());

    let bad = Scenario::new("review", "").with_checker(CheckerConfig::new("long-formulas").with_param("max_length", 0));
    for issue in registry.validate_scenario(&bad) {
        println!("rejected: {issue}");
    }

    let scenario = Scenario::new("review", "long formulas and constants")
        .with_checker(CheckerConfig::new("long-formulas").with_param("max_length", 30))
        .with_checker(CheckerConfig::new("constants-in-formulae"));
    let book = from_fixture_str(
        &json!({
            "id": "forecast",
            "sheets": [{ "name": "Plan", "cells": {
                "A1": { "value": 100 },
                "B1": { "formula": "=IF(A1>50,A1*1.05+ROUND(A1/12,2),A1*0.95-ROUND(A1/12,2))" },
                "B2": { "formula": "=A1*1.05" }
            }}]
        })
        .to_string(),
        "forecast.json",
    )
    .unwrap();
    let run = registry.run_scenario(&scenario, &[book]).unwrap();
    print!("{}", render_text(&Report::build(&run, &FilterSpec::default(), GroupKey::ByChecker)));
}
