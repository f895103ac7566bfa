use std::collections::BTreeMap;

use serde_json::json;

use crate::formula::normalize_r1c1;
use crate::model::{column_label, CellAddress};
use crate::policy::{CheckerDescriptor, Finding, Location, ParamSpec, ParamType, Params, ParsedWorkbook, RuleChecker};

use super::FORMULA_CONSISTENCY as ID;

const EXPLANATION: &str = "Neighbouring formulas along a row or column usually compute the same thing. \
A formula that differs from the rest is often a copy-paste slip or a manual override.";

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyConfig {
    /// Shortest run of adjacent formula cells that is inspected.
    pub min_run: usize,
}

impl Default for ConsistencyConfig {
    fn default() -> Self {
        Self { min_run: 3 }
    }
}

impl ConsistencyConfig {
    pub fn from_params(params: &Params) -> Self {
        Self {
            min_run: params.int("min_run").max(2) as usize,
        }
    }
}

#[derive(Clone, Copy)]
enum Axis {
    Row,
    Column,
}

/// Flags formulas that differ, in relative notation, from the other
/// formulas of their row or column run.
///
/// A run is a maximal sequence of adjacent cells holding parsed formulas.
/// The baseline is the form held by a strict majority of the run, or the
/// first cell's form when there is none; every other cell is reported.
pub fn check_formula_consistency(book: &ParsedWorkbook<'_>, config: &ConsistencyConfig) -> Vec<Finding> {
    let normalized: BTreeMap<CellAddress, String> =
        book.formulas().map(|(a, ast)| (a, normalize_r1c1(ast, a))).collect();

    let mut rows: BTreeMap<(usize, u32), Vec<CellAddress>> = BTreeMap::new();
    let mut columns: BTreeMap<(usize, u32), Vec<CellAddress>> = BTreeMap::new();
    for &a in normalized.keys() {
        rows.entry((a.sheet, a.row)).or_default().push(a);
        columns.entry((a.sheet, a.column)).or_default().push(a);
    }
    for cells in columns.values_mut() {
        cells.sort_by_key(|a| a.row);
    }

    let mut findings = Vec::new();
    for (axis, lines) in [(Axis::Row, &rows), (Axis::Column, &columns)] {
        for cells in lines.values() {
            for run in split_runs(cells, axis) {
                if run.len() >= config.min_run {
                    check_run(book, &normalized, run, axis, &mut findings);
                }
            }
        }
    }
    findings
}

fn split_runs(cells: &[CellAddress], axis: Axis) -> Vec<&[CellAddress]> {
    let pos = |a: &CellAddress| match axis {
        Axis::Row => a.column,
        Axis::Column => a.row,
    };
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=cells.len() {
        if i == cells.len() || pos(&cells[i]) != pos(&cells[i - 1]) + 1 {
            runs.push(&cells[start..i]);
            start = i;
        }
    }
    runs
}

fn check_run(
    book: &ParsedWorkbook<'_>,
    normalized: &BTreeMap<CellAddress, String>,
    run: &[CellAddress],
    axis: Axis,
    out: &mut Vec<Finding>,
) {
    let forms: Vec<&str> = run.iter().map(|a| normalized[a].as_str()).collect();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for f in &forms {
        *counts.entry(f).or_default() += 1;
    }
    if counts.len() < 2 {
        return;
    }
    let baseline = counts
        .iter()
        .find(|(_, &n)| 2 * n > run.len())
        .map_or(forms[0], |(f, _)| *f);
    let wb = book.book;
    let line = match axis {
        Axis::Row => format!("row {}", run[0].row + 1),
        Axis::Column => format!("column {}", column_label(run[0].column)),
    };
    let extent = format!("{}:{}", wb.label(run[0]), run[run.len() - 1].a1());
    for (address, form) in run.iter().zip(&forms) {
        if *form == baseline {
            continue;
        }
        let representative = run[forms.iter().position(|f| *f == baseline).unwrap_or(0)];
        out.push(Finding::new(
            ID,
            wb,
            Location::Cell { address: *address },
            format!(
                "Formula in {} differs from the other formulas in {line} ({extent})",
                wb.label(*address)
            ),
            EXPLANATION,
            format!(
                "Check whether {} should follow the pattern of {} and copy that formula if so.",
                wb.label(*address),
                wb.label(representative)
            ),
            run.to_vec(),
        ));
    }
}

pub struct FormulaConsistency;

impl RuleChecker for FormulaConsistency {
    fn descriptor(&self) -> CheckerDescriptor {
        CheckerDescriptor {
            id: ID.into(),
            display_name: "Formula consistency".into(),
            summary: "One formula per row or column".into(),
            param_schema: vec![ParamSpec::new(
                "min_run",
                ParamType::Int,
                json!(3),
                "Shortest run of adjacent formula cells that is inspected",
            )
            .at_least(2.0)],
        }
    }

    fn check(&self, workbook: &ParsedWorkbook<'_>, params: &Params) -> Vec<Finding> {
        check_formula_consistency(workbook, &ConsistencyConfig::from_params(params))
    }
}
