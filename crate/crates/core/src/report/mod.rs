//! Filtering, grouping and serialization of analysis results.

mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::evaluation::EvaluationResult;
use crate::model::{parse_a1_address, CellAddress, MalformedAddress};
use crate::policy::{AnalysisRun, CheckerFailure, Finding, Location, Scenario, Severity, SkippedFormula, WorkbookSummary};

pub use text::render_text;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// A rectangular block of cells, applied on every sheet unless the filter
/// also restricts sheets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRange {
    pub first_column: u32,
    pub first_row: u32,
    pub last_column: u32,
    pub last_row: u32,
}

impl CellRange {
    pub fn contains(&self, address: CellAddress) -> bool {
        (self.first_column..=self.last_column).contains(&address.column)
            && (self.first_row..=self.last_row).contains(&address.row)
    }
}

impl FromStr for CellRange {
    type Err = MalformedAddress;

    /// Accepts `B4` or `A1:C10`, corners in any order.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(':').unwrap_or((s, s));
        let a = parse_a1_address(a.trim())?;
        let b = parse_a1_address(b.trim())?;
        Ok(Self {
            first_column: a.column.min(b.column),
            first_row: a.row.min(b.row),
            last_column: a.column.max(b.column),
            last_row: a.row.max(b.row),
        })
    }
}

/// Which findings to keep. Absent dimensions select everything; present
/// ones are combined with AND.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workbook_ids: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checker_ids: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severities: Option<BTreeSet<Severity>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sheet_indices: Option<BTreeSet<usize>>,
    /// Keeps only findings anchored at a cell inside the range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_range: Option<CellRange>,
}

impl FilterSpec {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    pub fn matches(&self, f: &Finding) -> bool {
        fn allowed<T: Ord>(set: &Option<BTreeSet<T>>, value: &T) -> bool {
            set.as_ref().is_none_or(|s| s.contains(value))
        }
        allowed(&self.workbook_ids, &f.workbook_id)
            && allowed(&self.checker_ids, &f.checker_id)
            && allowed(&self.severities, &f.severity)
            && self
                .sheet_indices
                .as_ref()
                .is_none_or(|s| f.location.sheet().is_some_and(|i| s.contains(&i)))
            && self.cell_range.is_none_or(|r| f.cell().is_some_and(|c| r.contains(c)))
    }

    pub fn workbook(mut self, id: &str) -> Self {
        self.workbook_ids.get_or_insert_with(BTreeSet::new).insert(id.to_string());
        self
    }

    pub fn checker(mut self, id: &str) -> Self {
        self.checker_ids.get_or_insert_with(BTreeSet::new).insert(id.to_string());
        self
    }

    pub fn severity(mut self, severity: Severity) -> Self {
        self.severities.get_or_insert_with(BTreeSet::new).insert(severity);
        self
    }

    pub fn sheet(mut self, index: usize) -> Self {
        self.sheet_indices.get_or_insert_with(BTreeSet::new).insert(index);
        self
    }

    pub fn range(mut self, range: CellRange) -> Self {
        self.cell_range = Some(range);
        self
    }
}

/// Findings of `run` selected by `filter`, in run order.
pub fn filter_findings(run: &AnalysisRun, filter: &FilterSpec) -> Vec<Finding> {
    run.findings.iter().filter(|f| filter.matches(f)).cloned().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    ByCell,
    #[default]
    ByChecker,
    ByWorkbook,
}

impl FromStr for GroupKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "by_cell" => Ok(GroupKey::ByCell),
            "by_checker" => Ok(GroupKey::ByChecker),
            "by_workbook" => Ok(GroupKey::ByWorkbook),
            other => Err(format!("unknown grouping {other:?}; expected by_cell, by_checker or by_workbook")),
        }
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKey::ByCell => "by_cell",
            GroupKey::ByChecker => "by_checker",
            GroupKey::ByWorkbook => "by_workbook",
        })
    }
}

/// Group label of a finding under `key`.
pub fn group_label(finding: &Finding, key: GroupKey) -> String {
    match key {
        GroupKey::ByChecker => finding.checker_id.clone(),
        GroupKey::ByWorkbook => finding.workbook_id.clone(),
        GroupKey::ByCell => match finding.location {
            Location::Workbook => "(workbook)".into(),
            _ => format!("{}:{}", finding.workbook_id, finding.location_label),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FindingGroup {
    pub label: String,
    pub findings: Vec<Finding>,
}

/// Partitions findings by `key`. Groups are sorted by label; findings keep
/// their input order inside a group.
pub fn group_findings(findings: &[Finding], key: GroupKey) -> Vec<FindingGroup> {
    let mut groups: BTreeMap<String, Vec<Finding>> = BTreeMap::new();
    for f in findings {
        groups.entry(group_label(f, key)).or_default().push(f.clone());
    }
    groups
        .into_iter()
        .map(|(label, findings)| FindingGroup { label, findings })
        .collect()
}

/// Run data carried into a report, everything except the findings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub run_id: String,
    pub scenario: Scenario,
    pub workbooks: Vec<WorkbookSummary>,
    pub skipped_formulas: Vec<SkippedFormula>,
    pub checker_failures: Vec<CheckerFailure>,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportGroup {
    pub label: String,
    pub finding_ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub findings: usize,
    /// Every enabled checker of the scenario, including silent ones.
    pub by_checker: BTreeMap<String, usize>,
    /// Every analyzed workbook, including clean ones.
    pub by_workbook: BTreeMap<String, usize>,
}

/// A filtered, grouped view of one run. This is the JSON document written
/// by the command line and served over HTTP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub run: RunMetadata,
    pub filter: FilterSpec,
    pub grouping: GroupKey,
    pub findings: Vec<Finding>,
    pub groups: Vec<ReportGroup>,
    pub totals: Totals,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<EvaluationResult>,
}

impl Report {
    pub fn build(run: &AnalysisRun, filter: &FilterSpec, grouping: GroupKey) -> Self {
        let findings = filter_findings(run, filter);
        let groups = group_findings(&findings, grouping)
            .into_iter()
            .map(|g| ReportGroup {
                label: g.label,
                finding_ids: g.findings.into_iter().map(|f| f.finding_id).collect(),
            })
            .collect();
        let mut totals = Totals {
            findings: findings.len(),
            by_checker: run.scenario.enabled_checkers().map(|c| (c.checker_id.clone(), 0)).collect(),
            by_workbook: run.workbook_ids().map(|id| (id.to_string(), 0)).collect(),
        };
        for f in &findings {
            *totals.by_checker.entry(f.checker_id.clone()).or_default() += 1;
            *totals.by_workbook.entry(f.workbook_id.clone()).or_default() += 1;
        }
        Self {
            schema_version: SCHEMA_VERSION,
            run: RunMetadata {
                run_id: run.run_id.clone(),
                scenario: run.scenario.clone(),
                workbooks: run.workbooks.clone(),
                skipped_formulas: run.skipped_formulas.clone(),
                checker_failures: run.checker_failures.clone(),
                started_at: run.started_at,
                finished_at: run.finished_at,
            },
            filter: filter.clone(),
            grouping,
            findings,
            groups,
            totals,
            evaluation: None,
        }
    }

    pub fn with_evaluation(mut self, evaluation: EvaluationResult) -> Self {
        self.evaluation = Some(evaluation);
        self
    }

    /// Findings of one group, in report order.
    pub fn group_members<'a>(&'a self, group: &'a ReportGroup) -> impl Iterator<Item = &'a Finding> + 'a {
        group
            .finding_ids
            .iter()
            .filter_map(|id| self.findings.iter().find(|f| &f.finding_id == id))
    }

    /// The run as seen through this report: its metadata with the reported
    /// (possibly filtered) findings.
    pub fn to_run(&self) -> AnalysisRun {
        AnalysisRun {
            run_id: self.run.run_id.clone(),
            scenario: self.run.scenario.clone(),
            workbooks: self.run.workbooks.clone(),
            findings: self.findings.clone(),
            skipped_formulas: self.run.skipped_formulas.clone(),
            checker_failures: self.run.checker_failures.clone(),
            started_at: self.run.started_at,
            finished_at: self.run.finished_at,
        }
    }

    pub fn from_json_str(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "text" => Ok(OutputFormat::Text),
            other => Err(format!("unknown format {other:?}; expected json or text")),
        }
    }
}

pub fn serialize_report(report: &Report, format: OutputFormat, out: &mut dyn Write) -> io::Result<()> {
    match format {
        OutputFormat::Json => out.write_all(report.to_json_pretty().as_bytes()),
        OutputFormat::Text => out.write_all(render_text(report).as_bytes()),
    }
}
