//! Checker registry, scenarios and scenario execution.
//!
//! Checkers are compiled-in plugins implementing [`RuleChecker`]. A
//! [`Registry`] holds them by id; a [`Scenario`] selects and configures
//! some of them; [`Registry::run_scenario`] applies a scenario to a set of
//! workbooks and returns an [`AnalysisRun`].

mod finding;
mod params;
mod parsed;
mod scenario;

use std::collections::{BTreeMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::fixture::to_fixture_string;
use crate::model::Workbook;

pub use finding::{finding_id, Finding, Location, Severity};
pub use params::{CheckerDescriptor, ParamSpec, ParamType, Params};
pub use parsed::{ParsedWorkbook, SkippedFormula};
pub use scenario::{validate_scenario, CheckerConfig, IssueKind, Scenario, ScenarioFileError, ValidationIssue};

/// A rule checker plugin. Implementations must be pure functions of the
/// workbook and parameters; the engine may call them from several threads.
pub trait RuleChecker: Send + Sync {
    fn descriptor(&self) -> CheckerDescriptor;

    fn check(&self, workbook: &ParsedWorkbook<'_>, params: &Params) -> Vec<Finding>;
}

#[derive(Debug, Error, PartialEq)]
pub enum RegistryError {
    #[error("checker id {0:?} is already registered")]
    DuplicateId(String),
    #[error("checker {checker}: default of parameter {param:?} does not match its type")]
    BadDefault { checker: String, param: String },
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("scenario is invalid: {}", .0.iter().map(|i| i.message.as_str()).collect::<Vec<_>>().join("; "))]
    InvalidScenario(Vec<ValidationIssue>),
    #[error("workbook id {0:?} appears more than once")]
    DuplicateWorkbookId(String),
}

struct Entry {
    descriptor: CheckerDescriptor,
    checker: Arc<dyn RuleChecker>,
}

/// Immutable-after-startup set of available checkers, keyed by id.
#[derive(Clone, Default)]
pub struct Registry {
    entries: BTreeMap<String, Arc<Entry>>,
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

/// A checker that crashed while analyzing a workbook. The rest of the run
/// is unaffected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckerFailure {
    pub workbook_id: String,
    pub checker_id: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkbookSummary {
    pub id: String,
    pub origin: String,
    pub sheets: Vec<String>,
    pub cell_count: usize,
    pub formula_count: usize,
}

/// The frozen result of running one scenario over a set of workbooks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRun {
    pub run_id: String,
    pub scenario: Scenario,
    pub workbooks: Vec<WorkbookSummary>,
    pub findings: Vec<Finding>,
    pub skipped_formulas: Vec<SkippedFormula>,
    pub checker_failures: Vec<CheckerFailure>,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
}

impl AnalysisRun {
    pub fn workbook_ids(&self) -> impl Iterator<Item = &str> {
        self.workbooks.iter().map(|w| w.id.as_str())
    }

    pub fn workbook(&self, id: &str) -> Option<&WorkbookSummary> {
        self.workbooks.iter().find(|w| w.id == id)
    }

    pub fn findings_of<'a>(&'a self, checker_id: &'a str) -> impl Iterator<Item = &'a Finding> + 'a {
        self.findings.iter().filter(move |f| f.checker_id == checker_id)
    }
}

impl Registry {
    /// Registry holding the five built-in practice checkers.
    pub fn builtin() -> Self {
        let mut registry = Self::empty();
        for checker in crate::rules::builtin_checkers() {
            registry.register_arc(checker).expect("built-in checkers are consistent");
        }
        registry
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn register(&mut self, checker: impl RuleChecker + 'static) -> Result<(), RegistryError> {
        self.register_arc(Arc::new(checker))
    }

    pub fn register_arc(&mut self, checker: Arc<dyn RuleChecker>) -> Result<(), RegistryError> {
        let descriptor = checker.descriptor();
        if self.entries.contains_key(&descriptor.id) {
            return Err(RegistryError::DuplicateId(descriptor.id));
        }
        let mut names = HashSet::new();
        for p in &descriptor.param_schema {
            if !p.kind.accepts(&p.default) || !names.insert(p.name.as_str()) {
                return Err(RegistryError::BadDefault {
                    checker: descriptor.id.clone(),
                    param: p.name.clone(),
                });
            }
        }
        self.entries
            .insert(descriptor.id.clone(), Arc::new(Entry { descriptor, checker }));
        Ok(())
    }

    /// Descriptors sorted by id.
    pub fn list_checkers(&self) -> Vec<CheckerDescriptor> {
        self.entries.values().map(|e| e.descriptor.clone()).collect()
    }

    pub fn descriptor(&self, id: &str) -> Option<&CheckerDescriptor> {
        self.entries.get(id).map(|e| &e.descriptor)
    }

    pub fn validate_scenario(&self, scenario: &Scenario) -> Vec<ValidationIssue> {
        validate_scenario(self, scenario)
    }

    /// A scenario enabling every registered checker with its defaults.
    pub fn full_scenario(&self, name: &str) -> Scenario {
        Scenario {
            name: name.to_string(),
            description: "All registered checkers with default parameters".into(),
            checkers: self.entries.keys().map(|id| CheckerConfig::new(id)).collect(),
        }
    }

    /// Runs every enabled checker of `scenario` on every workbook.
    ///
    /// Work is spread over a bounded set of threads, one task per
    /// (workbook, checker) pair. Findings are sorted by workbook id,
    /// checker id and location, so equal inputs give equal findings.
    pub fn run_scenario(&self, scenario: &Scenario, workbooks: &[Workbook]) -> Result<AnalysisRun, RunError> {
        let issues = self.validate_scenario(scenario);
        if !issues.is_empty() {
            return Err(RunError::InvalidScenario(issues));
        }
        let mut ids = HashSet::new();
        for book in workbooks {
            if !ids.insert(book.id.as_str()) {
                return Err(RunError::DuplicateWorkbookId(book.id.clone()));
            }
        }
        let started_at = Utc::now();
        let scenario = scenario.clone();
        let parsed: Vec<ParsedWorkbook<'_>> = workbooks.iter().map(ParsedWorkbook::new).collect();

        let configs: Vec<(&CheckerConfig, Arc<Entry>)> = scenario
            .enabled_checkers()
            .map(|c| (c, Arc::clone(&self.entries[&c.checker_id])))
            .collect();
        let tasks: Vec<(usize, usize)> = (0..parsed.len())
            .flat_map(|w| (0..configs.len()).map(move |c| (w, c)))
            .collect();

        let next = AtomicUsize::new(0);
        let findings = Mutex::new(Vec::new());
        let failures = Mutex::new(Vec::new());
        let threads = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
            .min(tasks.len());
        std::thread::scope(|scope| {
            for _ in 0..threads {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&(w, c)) = tasks.get(i) else { break };
                    let (config, entry) = &configs[c];
                    let book = &parsed[w];
                    let params = entry.descriptor.resolve(&config.params);
                    let outcome = catch_unwind(AssertUnwindSafe(|| entry.checker.check(book, &params)));
                    match outcome {
                        Ok(mut batch) => {
                            for f in &mut batch {
                                f.severity = config.severity;
                                if f.checker_id != config.checker_id {
                                    f.checker_id = config.checker_id.clone();
                                    f.finding_id = finding_id(&f.checker_id, &f.workbook_id, &f.location, &f.message);
                                }
                            }
                            findings.lock().unwrap().extend(batch);
                        }
                        Err(payload) => {
                            let detail = payload
                                .downcast_ref::<&str>()
                                .map(|s| s.to_string())
                                .or_else(|| payload.downcast_ref::<String>().cloned())
                                .unwrap_or_else(|| "checker panicked".into());
                            failures.lock().unwrap().push(CheckerFailure {
                                workbook_id: book.book.id.clone(),
                                checker_id: config.checker_id.clone(),
                                detail,
                            });
                        }
                    }
                });
            }
        });

        let mut findings = findings.into_inner().unwrap();
        findings.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let mut checker_failures = failures.into_inner().unwrap();
        checker_failures.sort_by(|a, b| (&a.workbook_id, &a.checker_id).cmp(&(&b.workbook_id, &b.checker_id)));
        let mut skipped_formulas: Vec<SkippedFormula> = parsed.iter().flat_map(|p| p.skipped().to_vec()).collect();
        skipped_formulas.sort_by(|a, b| (&a.workbook_id, a.address).cmp(&(&b.workbook_id, b.address)));

        let mut summaries: Vec<WorkbookSummary> = workbooks
            .iter()
            .map(|b| WorkbookSummary {
                id: b.id.clone(),
                origin: b.origin.clone(),
                sheets: b.sheets().iter().map(|s| s.name.clone()).collect(),
                cell_count: b.cell_count(),
                formula_count: b.formula_count(),
            })
            .collect();
        summaries.sort_by(|a, b| a.id.cmp(&b.id));

        Ok(AnalysisRun {
            run_id: run_id(&scenario, workbooks),
            scenario,
            workbooks: summaries,
            findings,
            skipped_formulas,
            checker_failures,
            started_at,
            finished_at: Utc::now(),
        })
    }
}

/// Content-derived run id: equal scenario and workbook contents give the
/// same id.
fn run_id(scenario: &Scenario, workbooks: &[Workbook]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(scenario).expect("scenario serializes"));
    let mut sorted: Vec<&Workbook> = workbooks.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    for book in sorted {
        hasher.update([0u8]);
        hasher.update(to_fixture_string(book).as_bytes());
    }
    format!("run-{}", hex::encode(&hasher.finalize()[..8]))
}

/// Descriptors of the built-in checkers, sorted by id.
pub fn list_checkers() -> Vec<CheckerDescriptor> {
    Registry::builtin().list_checkers()
}

/// [`Registry::run_scenario`] on the built-in registry.
pub fn run_scenario(scenario: &Scenario, workbooks: &[Workbook]) -> Result<AnalysisRun, RunError> {
    Registry::builtin().run_scenario(scenario, workbooks)
}
