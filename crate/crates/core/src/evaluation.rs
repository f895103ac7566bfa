//! Correlating rule findings with expert ratings.
//!
//! Experts rate each workbook good or poor and may list the cells they
//! believe are wrong. A rule "fires" on a workbook when it reports at least
//! one finding there; comparing firing with the consensus rating gives a
//! confusion matrix per rule. A rule with no false positives and no false
//! negatives is *perfect*.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CellAddress, MalformedAddress};
use crate::policy::AnalysisRun;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rating {
    Good,
    Poor,
}

/// One expert's judgement of one workbook.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertRating {
    pub workbook_id: String,
    pub expert_id: String,
    pub rating: Rating,
    /// Cells the expert considers wrong, as `Sheet!A1`. `None` means the
    /// expert kept no error log; an empty list means they found no errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_cells: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl ExpertRating {
    pub fn new(workbook_id: &str, expert_id: &str, rating: Rating) -> Self {
        Self {
            workbook_id: workbook_id.to_string(),
            expert_id: expert_id.to_string(),
            rating,
            error_cells: None,
            notes: None,
        }
    }

    pub fn with_error_cells<S: Into<String>>(mut self, cells: impl IntoIterator<Item = S>) -> Self {
        self.error_cells = Some(cells.into_iter().map(Into::into).collect());
        self
    }

    /// Parses a ratings document: a JSON list of ratings.
    pub fn list_from_json_str(text: &str) -> serde_json::Result<Vec<Self>> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EvaluationError {
    #[error("no ratings given")]
    NoRatings,
    #[error("workbook {0:?} was analyzed but has no rating")]
    UnratedWorkbook(String),
    #[error("rating refers to workbook {0:?}, which is in none of the runs")]
    RatingWithoutRun(String),
    #[error("runs {first:?} and {other:?} used different scenarios")]
    ScenarioMismatch { first: String, other: String },
    #[error("workbook {0:?} appears in more than one run")]
    WorkbookInMultipleRuns(String),
    #[error("no rating carries an error log for the analyzed workbooks")]
    NoErrorCells,
    #[error("error cell {cell:?} of workbook {workbook_id:?} is malformed: {reason}")]
    MalformedErrorCell {
        workbook_id: String,
        cell: String,
        reason: String,
    },
}

/// Majority verdicts. Workbooks whose experts are split evenly are
/// undecided and take no part in the evaluation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Consensus {
    pub decided: BTreeMap<String, Rating>,
    pub undecided: BTreeSet<String>,
}

pub fn aggregate_experts(ratings: &[ExpertRating]) -> Consensus {
    let mut votes: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in ratings {
        let v = votes.entry(&r.workbook_id).or_default();
        match r.rating {
            Rating::Good => v.0 += 1,
            Rating::Poor => v.1 += 1,
        }
    }
    let mut consensus = Consensus::default();
    for (id, (good, poor)) in votes {
        let total = good + poor;
        if 2 * poor > total {
            consensus.decided.insert(id.to_string(), Rating::Poor);
        } else if 2 * good > total {
            consensus.decided.insert(id.to_string(), Rating::Good);
        } else {
            consensus.undecided.insert(id.to_string());
        }
    }
    consensus
}

/// Confusion matrix and derived statistics for one checker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleMetrics {
    pub checker_id: String,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub mcc: f64,
    pub perfect: bool,
    /// Statistics whose denominator was zero; they are reported as 0.
    pub undefined: Vec<String>,
}

impl RuleMetrics {
    /// Derives all statistics from the four counts.
    pub fn from_counts(checker_id: &str, tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        let mut undefined = Vec::new();
        let mut ratio = |name: &str, num: u64, den: u64| {
            if den == 0 {
                undefined.push(name.to_string());
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio("precision", tp, tp + fp);
        let recall = ratio("recall", tp, tp + fn_);
        let accuracy = ratio("accuracy", tp + tn, tp + fp + fn_ + tn);
        let (tp_, fp_, fn__, tn_) = (u128::from(tp), u128::from(fp), u128::from(fn_), u128::from(tn));
        let margins = [tp_ + fp_, tp_ + fn__, tn_ + fp_, tn_ + fn__];
        let mcc = if margins.contains(&0) {
            undefined.push("mcc".into());
            0.0
        } else {
            // The product of the margins can exceed u128; only then take
            // roots factor by factor, which costs a little precision.
            let denominator = match margins.iter().try_fold(1u128, |acc, &m| acc.checked_mul(m)) {
                Some(product) => (product as f64).sqrt(),
                None => margins.iter().map(|&m| (m as f64).sqrt()).product(),
            };
            let numerator = (tp_ * tn_) as f64 - (fp_ * fn__) as f64;
            (numerator / denominator).clamp(-1.0, 1.0)
        };
        Self {
            checker_id: checker_id.to_string(),
            tp,
            fp,
            fn_,
            tn,
            precision,
            recall,
            accuracy,
            mcc,
            perfect: fp == 0 && fn_ == 0 && tp + tn > 0,
            undefined,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn is_undefined(&self, statistic: &str) -> bool {
        self.undefined.iter().any(|s| s == statistic)
    }
}

/// Cell-level agreement between one checker and the experts' error logs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellMatch {
    pub checker_id: String,
    /// Expert error cells matched by at least one finding.
    pub hits: u64,
    /// Expert error cells matched by no finding.
    pub misses: u64,
    /// Findings matching no expert error cell.
    pub spurious: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    /// Sorted by checker id.
    pub rules: Vec<RuleMetrics>,
    /// Checker ids by descending mcc, ties by id.
    pub ranking: Vec<String>,
    /// Empty unless some rating carries an error log.
    pub cell_matches: Vec<CellMatch>,
    pub rated_workbooks: usize,
    pub undecided_workbooks: Vec<String>,
}

impl EvaluationResult {
    pub fn rule(&self, checker_id: &str) -> Option<&RuleMetrics> {
        self.rules.iter().find(|r| r.checker_id == checker_id)
    }

    pub fn perfect_rules(&self) -> impl Iterator<Item = &RuleMetrics> {
        self.rules.iter().filter(|r| r.perfect)
    }
}

/// Scores every enabled checker of the runs' shared scenario against the
/// consensus ratings.
///
/// Every workbook of the runs must be rated and every rating must refer to
/// a workbook of exactly one run.
pub fn evaluate_rules(runs: &[AnalysisRun], ratings: &[ExpertRating]) -> Result<EvaluationResult, EvaluationError> {
    if ratings.is_empty() {
        return Err(EvaluationError::NoRatings);
    }
    let mut sorted_runs: Vec<&AnalysisRun> = runs.iter().collect();
    sorted_runs.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    if let Some(first) = sorted_runs.first() {
        if let Some(other) = sorted_runs.iter().find(|r| r.scenario != first.scenario) {
            return Err(EvaluationError::ScenarioMismatch {
                first: first.run_id.clone(),
                other: other.run_id.clone(),
            });
        }
    }
    let mut owner: BTreeMap<&str, &AnalysisRun> = BTreeMap::new();
    for run in &sorted_runs {
        for id in run.workbook_ids() {
            if owner.insert(id, run).is_some() {
                return Err(EvaluationError::WorkbookInMultipleRuns(id.to_string()));
            }
        }
    }
    let mut rating_ids: Vec<&str> = ratings.iter().map(|r| r.workbook_id.as_str()).collect();
    rating_ids.sort_unstable();
    if let Some(id) = rating_ids.iter().find(|id| !owner.contains_key(*id)) {
        return Err(EvaluationError::RatingWithoutRun(id.to_string()));
    }
    if let Some(id) = owner.keys().find(|id| rating_ids.binary_search(id).is_err()) {
        return Err(EvaluationError::UnratedWorkbook(id.to_string()));
    }

    let consensus = aggregate_experts(ratings);
    let checkers: BTreeSet<&str> = sorted_runs
        .first()
        .map(|r| r.scenario.enabled_checkers().map(|c| c.checker_id.as_str()).collect())
        .unwrap_or_default();
    let fires: BTreeSet<(&str, &str)> = sorted_runs
        .iter()
        .flat_map(|r| r.findings.iter())
        .map(|f| (f.workbook_id.as_str(), f.checker_id.as_str()))
        .collect();

    let rules: Vec<RuleMetrics> = checkers
        .iter()
        .map(|&checker| {
            let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
            for (workbook, rating) in &consensus.decided {
                match (fires.contains(&(workbook.as_str(), checker)), rating) {
                    (true, Rating::Poor) => tp += 1,
                    (true, Rating::Good) => fp += 1,
                    (false, Rating::Poor) => fn_ += 1,
                    (false, Rating::Good) => tn += 1,
                }
            }
            RuleMetrics::from_counts(checker, tp, fp, fn_, tn)
        })
        .collect();

    let mut ranking: Vec<&RuleMetrics> = rules.iter().collect();
    ranking.sort_by(|a, b| b.mcc.total_cmp(&a.mcc).then_with(|| a.checker_id.cmp(&b.checker_id)));
    let ranking = ranking.into_iter().map(|r| r.checker_id.clone()).collect();

    let mut cell_matches = Vec::new();
    if ratings.iter().any(|r| r.error_cells.is_some()) {
        let mut totals: BTreeMap<String, CellMatch> = BTreeMap::new();
        for run in &sorted_runs {
            let matches = match match_error_cells(run, ratings) {
                Ok(m) => m,
                Err(EvaluationError::NoErrorCells) => continue,
                Err(e) => return Err(e),
            };
            for m in matches {
                let t = totals.entry(m.checker_id.clone()).or_insert_with(|| CellMatch {
                    checker_id: m.checker_id.clone(),
                    ..Default::default()
                });
                t.hits += m.hits;
                t.misses += m.misses;
                t.spurious += m.spurious;
            }
        }
        cell_matches = totals.into_values().collect();
    }

    Ok(EvaluationResult {
        rules,
        ranking,
        cell_matches,
        rated_workbooks: consensus.decided.len(),
        undecided_workbooks: consensus.undecided.into_iter().collect(),
    })
}

/// Parses `Sheet!B4` (sheet names may be quoted) against a workbook's
/// sheet names.
pub fn parse_error_cell(text: &str, sheets: &[String]) -> Result<CellAddress, String> {
    let (sheet, cell) = text
        .rsplit_once('!')
        .ok_or_else(|| "expected Sheet!A1".to_string())?;
    let sheet = match sheet.strip_prefix('\'').and_then(|s| s.strip_suffix('\'')) {
        Some(quoted) => quoted.replace("''", "'"),
        None => sheet.to_string(),
    };
    let index = sheets
        .iter()
        .position(|s| s.eq_ignore_ascii_case(&sheet))
        .ok_or_else(|| format!("no sheet named {sheet:?}"))?;
    CellAddress::parse_on(index, cell.trim()).map_err(|e: MalformedAddress| e.to_string())
}

/// Matches the findings of `run` against the experts' error logs.
///
/// Only workbooks of the run with at least one error log count. Logs of
/// several experts are united.
pub fn match_error_cells(run: &AnalysisRun, ratings: &[ExpertRating]) -> Result<Vec<CellMatch>, EvaluationError> {
    let mut logs: HashMap<&str, BTreeSet<CellAddress>> = HashMap::new();
    for rating in ratings {
        let (Some(cells), Some(summary)) = (&rating.error_cells, run.workbook(&rating.workbook_id)) else {
            continue;
        };
        let log = logs.entry(summary.id.as_str()).or_default();
        for cell in cells {
            let address = parse_error_cell(cell, &summary.sheets).map_err(|reason| EvaluationError::MalformedErrorCell {
                workbook_id: summary.id.clone(),
                cell: cell.clone(),
                reason,
            })?;
            log.insert(address);
        }
    }
    if logs.is_empty() {
        return Err(EvaluationError::NoErrorCells);
    }

    let checkers: BTreeSet<&str> = run.scenario.enabled_checkers().map(|c| c.checker_id.as_str()).collect();
    let mut out = Vec::new();
    for checker in checkers {
        let mut m = CellMatch {
            checker_id: checker.to_string(),
            ..Default::default()
        };
        let mut logged: Vec<(&&str, &BTreeSet<CellAddress>)> = logs.iter().collect();
        logged.sort();
        for (workbook, expert_cells) in logged {
            let findings: Vec<_> = run
                .findings
                .iter()
                .filter(|f| f.checker_id == checker && f.workbook_id == *workbook)
                .collect();
            let matches = |f: &crate::policy::Finding, e: CellAddress| f.location.covers(e) || f.related_cells.contains(&e);
            for &e in expert_cells {
                if findings.iter().any(|f| matches(f, e)) {
                    m.hits += 1;
                } else {
                    m.misses += 1;
                }
            }
            m.spurious += findings
                .iter()
                .filter(|f| !expert_cells.iter().any(|&e| matches(f, e)))
                .count() as u64;
        }
        out.push(m);
    }
    Ok(out)
}

/// Plain-text table of an evaluation, in ranking order.
pub fn render_text(result: &EvaluationResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Rule evaluation over {} rated workbooks ({} undecided excluded)",
        result.rated_workbooks,
        result.undecided_workbooks.len()
    );
    let width = result.rules.iter().map(|r| r.checker_id.len()).max().unwrap_or(7).max(7);
    let _ = writeln!(
        out,
        "{:>4}  {:<width$}  {:>4} {:>4} {:>4} {:>4}  {:>9} {:>7} {:>8} {:>7}  perfect",
        "rank", "checker", "tp", "fp", "fn", "tn", "precision", "recall", "accuracy", "mcc"
    );
    let stat = |r: &RuleMetrics, name: &str, v: f64| {
        if r.is_undefined(name) {
            "n/a".to_string()
        } else {
            format!("{v:.3}")
        }
    };
    for (rank, id) in result.ranking.iter().enumerate() {
        let Some(r) = result.rule(id) else { continue };
        let _ = writeln!(
            out,
            "{:>4}  {:<width$}  {:>4} {:>4} {:>4} {:>4}  {:>9} {:>7} {:>8} {:>7}  {}",
            rank + 1,
            r.checker_id,
            r.tp,
            r.fp,
            r.fn_,
            r.tn,
            stat(r, "precision", r.precision),
            stat(r, "recall", r.recall),
            stat(r, "accuracy", r.accuracy),
            stat(r, "mcc", r.mcc),
            if r.perfect { "yes" } else { "no" }
        );
    }
    if !result.cell_matches.is_empty() {
        let _ = writeln!(out, "\nError-log matches:");
        for m in &result.cell_matches {
            let _ = writeln!(
                out,
                "  {:<width$}  hits {}  misses {}  spurious {}",
                m.checker_id, m.hits, m.misses, m.spurious
            );
        }
    }
    out
}
