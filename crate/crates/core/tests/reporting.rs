//! Filtering, grouping and serialization of findings reports.

mod common;

use std::collections::BTreeSet;

use common::Generator;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sheet_workbench::policy::*;
use sheet_workbench::report::*;

const CHECKERS: [(&str, Severity); 5] = [
    ("blank-only-cells", Severity::Info),
    ("constants-in-formulae", Severity::Warning),
    ("formula-consistency", Severity::Warning),
    ("reference-direction", Severity::Error),
    ("unprotected-formula-cells", Severity::Error),
];

fn mixed_run() -> AnalysisRun {
    let mut scenario = Scenario::new("mixed", "every checker, three severities");
    for (id, severity) in CHECKERS {
        scenario = scenario.with_checker(CheckerConfig::new(id).with_severity(severity));
    }
    let books: Vec<_> = (0..6)
        .map(|i| Generator::new(500 + i).gen_book(&format!("book-{i}"), 250).workbook())
        .collect();
    run_scenario(&scenario, &books).unwrap()
}

fn random_filter(rng: &mut ChaCha8Rng, run: &AnalysisRun) -> FilterSpec {
    let mut spec = FilterSpec::default();
    if rng.gen_bool(0.4) {
        for id in run.workbook_ids() {
            if rng.gen_bool(0.5) {
                spec = spec.workbook(id);
            }
        }
    }
    if rng.gen_bool(0.4) {
        let n = rng.gen_range(0..=3);
        for (id, _) in CHECKERS.choose_multiple(rng, n) {
            spec = spec.checker(id);
        }
    }
    if rng.gen_bool(0.4) {
        spec = spec.severity([Severity::Info, Severity::Warning, Severity::Error][rng.gen_range(0..3)]);
    }
    if rng.gen_bool(0.3) {
        spec = spec.sheet(rng.gen_range(0..3));
    }
    if rng.gen_bool(0.3) {
        let (c0, r0) = (rng.gen_range(0..10), rng.gen_range(0..12));
        spec = spec.range(CellRange {
            first_column: c0,
            first_row: r0,
            last_column: c0 + rng.gen_range(0..5),
            last_row: r0 + rng.gen_range(0..6),
        });
    }
    spec
}

/// Independent statement of the filter semantics.
fn oracle_keep(spec: &FilterSpec, f: &Finding) -> bool {
    let anchor = match f.location {
        Location::Cell { address } => Some(address),
        Location::Range { start, .. } => Some(start),
        _ => None,
    };
    if let Some(ids) = &spec.workbook_ids {
        if !ids.contains(&f.workbook_id) {
            return false;
        }
    }
    if let Some(ids) = &spec.checker_ids {
        if !ids.contains(&f.checker_id) {
            return false;
        }
    }
    if let Some(sev) = &spec.severities {
        if !sev.contains(&f.severity) {
            return false;
        }
    }
    if let Some(sheets) = &spec.sheet_indices {
        match anchor {
            Some(a) if sheets.contains(&a.sheet) => {}
            _ => return false,
        }
    }
    if let Some(r) = spec.cell_range {
        match anchor {
            Some(a)
                if a.column >= r.first_column
                    && a.column <= r.last_column
                    && a.row >= r.first_row
                    && a.row <= r.last_row => {}
            _ => return false,
        }
    }
    true
}

fn oracle_label(f: &Finding, key: GroupKey) -> String {
    match key {
        GroupKey::ByChecker => f.checker_id.clone(),
        GroupKey::ByWorkbook => f.workbook_id.clone(),
        GroupKey::ByCell => format!("{}:{}", f.workbook_id, f.location_label),
    }
}

#[test]
fn run_has_material_to_filter() {
    let run = mixed_run();
    assert!(run.findings.len() > 50, "{}", run.findings.len());
    let severities: BTreeSet<Severity> = run.findings.iter().map(|f| f.severity).collect();
    assert_eq!(severities.len(), 3);
}

#[test]
fn filters_match_oracle() {
    let run = mixed_run();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let spec = random_filter(&mut rng, &run);
        let want: Vec<&Finding> = run.findings.iter().filter(|f| oracle_keep(&spec, f)).collect();
        let got = filter_findings(&run, &spec);
        assert_eq!(got.iter().collect::<Vec<_>>(), want, "{spec:?}");
    }
    assert_eq!(filter_findings(&run, &FilterSpec::default()), run.findings);
}

#[test]
fn groups_partition_findings() {
    let run = mixed_run();
    for key in [GroupKey::ByCell, GroupKey::ByChecker, GroupKey::ByWorkbook] {
        let groups = group_findings(&run.findings, key);
        let labels: Vec<&String> = groups.iter().map(|g| &g.label).collect();
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(labels, sorted, "{key}: labels sorted and unique");
        let mut seen = 0;
        for g in &groups {
            assert!(!g.findings.is_empty());
            for f in &g.findings {
                assert_eq!(oracle_label(f, key), g.label);
            }
            let expected: Vec<&Finding> = run.findings.iter().filter(|f| oracle_label(f, key) == g.label).collect();
            assert_eq!(g.findings.iter().collect::<Vec<_>>(), expected);
            seen += g.findings.len();
        }
        assert_eq!(seen, run.findings.len());
    }
}

#[test]
fn filtering_commutes_with_grouping() {
    let run = mixed_run();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let spec = random_filter(&mut rng, &run);
        for key in [GroupKey::ByCell, GroupKey::ByChecker, GroupKey::ByWorkbook] {
            let filter_then_group = group_findings(&filter_findings(&run, &spec), key);
            let group_then_filter: Vec<FindingGroup> = group_findings(&run.findings, key)
                .into_iter()
                .map(|g| FindingGroup {
                    findings: g.findings.into_iter().filter(|f| spec.matches(f)).collect(),
                    label: g.label,
                })
                .filter(|g| !g.findings.is_empty())
                .collect();
            assert_eq!(filter_then_group, group_then_filter);
        }
    }
}

#[test]
fn report_structure_and_round_trip() {
    let run = mixed_run();
    let spec = FilterSpec::default().severity(Severity::Error).workbook("book-0").workbook("book-1");
    let report = Report::build(&run, &spec, GroupKey::ByCell);
    assert_eq!(report.schema_version, SCHEMA_VERSION);
    assert!(report.findings.iter().all(|f| f.severity == Severity::Error));
    assert_eq!(report.totals.findings, report.findings.len());
    assert_eq!(report.totals.by_checker.len(), 5, "silent checkers still listed");
    assert_eq!(report.totals.by_workbook.len(), 6, "filtered-out workbooks still listed");
    assert_eq!(report.totals.by_checker["blank-only-cells"], 0);
    let grouped: usize = report.groups.iter().map(|g| report.group_members(g).count()).sum();
    assert_eq!(grouped, report.findings.len());

    let json = report.to_json_pretty();
    assert!(json.ends_with('\n'));
    let back = Report::from_json_str(&json).unwrap();
    assert_eq!(back, report);
    assert_eq!(back.to_json_pretty(), json);

    let rebuilt = Report::build(&back.to_run(), &spec, GroupKey::ByCell);
    assert_eq!(rebuilt, report);

    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    for key in ["schema_version", "run", "filter", "grouping", "findings", "groups", "totals"] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
    assert_eq!(value["grouping"], "by_cell");
    let finding = &value["findings"][0];
    for key in [
        "finding_id", "checker_id", "workbook_id", "location", "location_label", "severity", "message",
        "explanation", "suggestion", "related_cells",
    ] {
        assert!(finding.get(key).is_some(), "finding lacks {key}");
    }
}

#[test]
fn text_rendering_mentions_every_finding() {
    let run = mixed_run();
    let report = Report::build(&run, &FilterSpec::default().checker("formula-consistency"), GroupKey::ByWorkbook);
    let mut out = Vec::new();
    serialize_report(&report, OutputFormat::Text, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains(&run.run_id));
    for f in &report.findings {
        assert!(text.contains(&f.message), "{}", f.message);
    }
    for g in &report.groups {
        assert!(text.contains(&g.label));
    }
}

#[test]
fn cell_range_parsing() {
    let r: CellRange = "C10:A1".parse().unwrap();
    assert_eq!((r.first_column, r.first_row, r.last_column, r.last_row), (0, 0, 2, 9));
    let single: CellRange = "B4".parse().unwrap();
    assert_eq!((single.first_column, single.first_row, single.last_column, single.last_row), (1, 3, 1, 3));
    assert!("A1:".parse::<CellRange>().is_err());
    assert!("by_sheet".parse::<GroupKey>().is_err());
    assert_eq!("by_cell".parse::<GroupKey>().unwrap(), GroupKey::ByCell);
}
