use std::fmt::Write as _;

use crate::model::CellAddress;

use super::Report;

fn cell_label(report: &Report, workbook_id: &str, address: CellAddress) -> String {
    let sheet = report
        .run
        .workbooks
        .iter()
        .find(|w| w.id == workbook_id)
        .and_then(|w| w.sheets.get(address.sheet))
        .map_or_else(|| format!("#{}", address.sheet), Clone::clone);
    format!("{sheet}!{}", address.a1())
}

/// Plain-text rendering: one block per group, each finding with its
/// description, explanation and suggestion.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let run = &report.run;
    let _ = writeln!(out, "Run {} - scenario {:?}", run.run_id, run.scenario.name);
    for w in &run.workbooks {
        let _ = writeln!(
            out,
            "  workbook {} ({} sheets, {} cells, {} formulas)",
            w.id,
            w.sheets.len(),
            w.cell_count,
            w.formula_count
        );
    }
    let _ = writeln!(out, "{} findings, grouped {}", report.totals.findings, report.grouping);

    for group in &report.groups {
        let _ = writeln!(out, "\n== {} ({})", group.label, group.finding_ids.len());
        for f in report.group_members(group) {
            let _ = writeln!(out, "[{}] {} {}:{}", f.severity, f.checker_id, f.workbook_id, f.location_label);
            let _ = writeln!(out, "    {}", f.message);
            let _ = writeln!(out, "    Why: {}", f.explanation);
            let _ = writeln!(out, "    Fix: {}", f.suggestion);
            if !f.related_cells.is_empty() {
                let related: Vec<String> =
                    f.related_cells.iter().map(|a| cell_label(report, &f.workbook_id, *a)).collect();
                let _ = writeln!(out, "    Related: {}", related.join(", "));
            }
        }
    }

    if !run.skipped_formulas.is_empty() {
        let _ = writeln!(out, "\nSkipped formulas ({}):", run.skipped_formulas.len());
        for s in &run.skipped_formulas {
            let _ = writeln!(out, "  {}:{} {} - {}", s.workbook_id, s.location_label, s.formula, s.reason);
        }
    }
    if !run.checker_failures.is_empty() {
        let _ = writeln!(out, "\nChecker failures ({}):", run.checker_failures.len());
        for c in &run.checker_failures {
            let _ = writeln!(out, "  {} on {}: {}", c.checker_id, c.workbook_id, c.detail);
        }
    }

    let _ = writeln!(out, "\nTotals by checker:");
    let width = report.totals.by_checker.keys().map(String::len).max().unwrap_or(0);
    for (id, n) in &report.totals.by_checker {
        let _ = writeln!(out, "  {id:<width$}  {n}");
    }
    let _ = writeln!(out, "Totals by workbook:");
    let width = report.totals.by_workbook.keys().map(String::len).max().unwrap_or(0);
    for (id, n) in &report.totals.by_workbook {
        let _ = writeln!(out, "  {id:<width$}  {n}");
    }
    if let Some(evaluation) = &report.evaluation {
        out.push('\n');
        out.push_str(&crate::evaluation::render_text(evaluation));
    }
    out
}
