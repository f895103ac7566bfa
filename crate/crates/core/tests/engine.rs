//! Scenario execution: registry, validation, isolation and determinism.

mod common;

use std::collections::BTreeSet;
use std::path::PathBuf;

use common::Generator;
use serde_json::json;
use sheet_workbench::model::{load_workbook, CellAddress, Workbook};
use sheet_workbench::policy::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn book(name: &str) -> Workbook {
    load_workbook(fixture(name), None).unwrap()
}

fn scenario(name: &str) -> Scenario {
    Scenario::load(fixture(&format!("scenarios/{name}.json"))).unwrap()
}

fn ids(run: &AnalysisRun) -> BTreeSet<String> {
    run.findings.iter().map(|f| f.finding_id.clone()).collect()
}

#[test]
fn quarterly_walkthrough() {
    let run = run_scenario(&scenario("quarterly"), &[book("quarterly.json")]).unwrap();
    assert_eq!(run.findings.len(), 2);
    let constant = run.findings_of("constants-in-formulae").next().unwrap();
    assert_eq!(constant.location_label, "Revenue!E2");
    assert_eq!(constant.severity, Severity::Warning);
    assert_eq!(constant.related_cells.len(), 3);
    assert!(constant.message.contains("1.19"));
    let unprotected = run.findings_of("unprotected-formula-cells").next().unwrap();
    assert_eq!(unprotected.location_label, "Revenue!E6");
    assert_eq!(unprotected.severity, Severity::Error);
    assert!(run.checker_failures.is_empty());
    assert_eq!(run.workbooks[0].sheets, ["Revenue"]);
}

struct Exploding;

impl RuleChecker for Exploding {
    fn descriptor(&self) -> CheckerDescriptor {
        CheckerDescriptor {
            id: "exploding".into(),
            display_name: "Exploding".into(),
            summary: "Panics on every workbook".into(),
            param_schema: vec![],
        }
    }

    fn check(&self, _: &ParsedWorkbook<'_>, _: &Params) -> Vec<Finding> {
        panic!("checker blew up")
    }
}

#[test]
fn crashing_checker_is_isolated() {
    let books = [book("quarterly.json"), book("messy.json")];
    let base = Registry::builtin().full_scenario("base");
    let mut registry = Registry::builtin();
    registry.register(Exploding).unwrap();
    let with_crash = base.clone().with_checker(CheckerConfig::new("exploding"));

    let healthy = registry.run_scenario(&base, &books).unwrap();
    let crashed = registry.run_scenario(&with_crash, &books).unwrap();
    assert_eq!(ids(&healthy), ids(&crashed));
    let failed: Vec<(&str, &str)> = crashed
        .checker_failures
        .iter()
        .map(|f| (f.workbook_id.as_str(), f.checker_id.as_str()))
        .collect();
    assert_eq!(failed, [("quarterly-2024", "exploding"), ("sales-tracker", "exploding")]);
    assert!(crashed.checker_failures[0].detail.contains("checker blew up"));
}

#[test]
fn enabling_checkers_only_adds_findings() {
    let registry = Registry::builtin();
    let all: Vec<String> = registry.list_checkers().into_iter().map(|d| d.id).collect();
    for seed in 0..20 {
        let wb = Generator::new(1000 + seed).gen_book(&format!("m{seed}"), 300).workbook();
        let mut previous = BTreeSet::new();
        let mut scenario = Scenario::new("grow", "");
        for id in &all {
            scenario = scenario.with_checker(CheckerConfig::new(id));
            let current = ids(&registry.run_scenario(&scenario, std::slice::from_ref(&wb)).unwrap());
            assert!(previous.is_subset(&current), "seed {seed} after enabling {id}");
            previous = current;
        }
    }
}

#[test]
fn disabled_checkers_report_nothing() {
    let mut s = scenario("all_practices");
    for c in &mut s.checkers {
        c.enabled = false;
    }
    let run = run_scenario(&s, &[book("messy.json")]).unwrap();
    assert!(run.findings.is_empty());
    s.checker_mut("blank-only-cells").unwrap().enabled = true;
    let run = run_scenario(&s, &[book("messy.json")]).unwrap();
    assert!(!run.findings.is_empty());
    assert!(run.findings.iter().all(|f| f.checker_id == "blank-only-cells"));
}

#[test]
fn runs_are_deterministic_and_order_independent() {
    let s = scenario("all_practices");
    let forward = [book("quarterly.json"), book("messy.json"), book("clean.json")];
    let backward = [book("clean.json"), book("messy.json"), book("quarterly.json")];
    let a = run_scenario(&s, &forward).unwrap();
    let b = run_scenario(&s, &backward).unwrap();
    assert_eq!(a.run_id, b.run_id);
    assert_eq!(a.findings, b.findings);
    assert_eq!(a.workbooks, b.workbooks);
    assert_eq!(a.skipped_formulas, b.skipped_formulas);
    assert!(a.run_id.starts_with("run-") && a.run_id.len() == 20);

    let mut other = s.clone();
    other.checker_mut("formula-consistency").unwrap().params.insert("min_run".into(), json!(4));
    assert_ne!(run_scenario(&other, &forward).unwrap().run_id, a.run_id);
}

#[test]
fn skipped_formulas_are_listed() {
    let run = run_scenario(&scenario("all_practices"), &[book("messy.json")]).unwrap();
    assert_eq!(run.findings.len(), 14);
    assert_eq!(run.skipped_formulas.len(), 1);
    assert_eq!(run.skipped_formulas[0].formula, "=Discount*C6");
}

#[test]
fn invalid_scenarios_are_rejected_with_issues() {
    let issues = Registry::builtin().validate_scenario(&scenario("invalid"));
    let kinds: Vec<IssueKind> = issues.iter().map(|i| i.kind).collect();
    assert!(kinds.contains(&IssueKind::UnknownChecker));
    assert!(kinds.contains(&IssueKind::ParamTypeMismatch));
    assert!(issues.iter().any(|i| i.param.as_deref() == Some("min_uses")));

    let s = Scenario::new("bad", "")
        .with_checker(CheckerConfig::new("formula-consistency").with_param("min_run", 1))
        .with_checker(CheckerConfig::new("formula-consistency"))
        .with_checker(CheckerConfig::new("blank-only-cells").with_param("colour", "red"));
    let kinds: Vec<IssueKind> = Registry::builtin().validate_scenario(&s).iter().map(|i| i.kind).collect();
    for k in [IssueKind::ParamOutOfRange, IssueKind::DuplicateChecker, IssueKind::UnknownParam] {
        assert!(kinds.contains(&k), "{k:?} missing from {kinds:?}");
    }
    assert!(matches!(
        run_scenario(&s, &[book("clean.json")]),
        Err(RunError::InvalidScenario(_))
    ));
    assert!(Registry::builtin().validate_scenario(&Scenario::new(" ", "")).iter().any(|i| i.kind == IssueKind::EmptyName));
}

#[test]
fn duplicate_ids_are_rejected() {
    let s = scenario("quarterly");
    assert!(matches!(
        run_scenario(&s, &[book("clean.json"), book("clean.json")]),
        Err(RunError::DuplicateWorkbookId(id)) if id == "budget"
    ));
    let mut registry = Registry::builtin();
    assert!(matches!(
        registry.register(sheet_workbench::rules::BlankOnlyCells),
        Err(RegistryError::DuplicateId(_))
    ));
}

#[test]
fn registry_lists_five_checkers_with_schemas() {
    let list = list_checkers();
    let ids: Vec<&str> = list.iter().map(|d| d.id.as_str()).collect();
    assert_eq!(
        ids,
        [
            "blank-only-cells",
            "constants-in-formulae",
            "formula-consistency",
            "reference-direction",
            "unprotected-formula-cells"
        ]
    );
    for d in &list {
        for p in &d.param_schema {
            assert!(p.kind.accepts(&p.default), "{}.{}", d.id, p.name);
        }
    }
    let constants = list.iter().find(|d| d.id == "constants-in-formulae").unwrap();
    assert_eq!(constants.param("min_uses").unwrap().kind, ParamType::Int);
}

#[test]
fn findings_carry_stable_ids() {
    let run = run_scenario(&scenario("quarterly"), &[book("quarterly.json")]).unwrap();
    for f in &run.findings {
        assert_eq!(f.finding_id, finding_id(&f.checker_id, &f.workbook_id, &f.location, &f.message));
        assert!(!f.explanation.is_empty() && !f.suggestion.is_empty());
    }
    let e2 = CellAddress::new(0, 4, 1);
    assert_eq!(run.findings_of("constants-in-formulae").next().unwrap().cell(), Some(e2));
}
