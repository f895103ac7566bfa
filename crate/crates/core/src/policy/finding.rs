use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{CellAddress, Workbook};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    #[default]
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

impl std::str::FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "info" => Ok(Severity::Info),
            "warning" => Ok(Severity::Warning),
            "error" => Ok(Severity::Error),
            other => Err(format!("unknown severity {other:?}")),
        }
    }
}

/// Where a finding applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Location {
    Workbook,
    Sheet { sheet: usize },
    Cell { address: CellAddress },
    Range { start: CellAddress, end: CellAddress },
}

impl Location {
    pub fn sheet(&self) -> Option<usize> {
        match self {
            Location::Workbook => None,
            Location::Sheet { sheet } => Some(*sheet),
            Location::Cell { address } => Some(address.sheet),
            Location::Range { start, .. } => Some(start.sheet),
        }
    }

    /// Whether `address` is the location cell or lies inside the location
    /// range.
    pub fn covers(&self, address: CellAddress) -> bool {
        match self {
            Location::Cell { address: a } => *a == address,
            Location::Range { start, end } => {
                start.sheet == address.sheet
                    && (start.column..=end.column).contains(&address.column)
                    && (start.row..=end.row).contains(&address.row)
            }
            _ => false,
        }
    }

    fn key(&self) -> String {
        match self {
            Location::Workbook => "workbook".into(),
            Location::Sheet { sheet } => format!("sheet:{sheet}"),
            Location::Cell { address } => format!("cell:{}:{}:{}", address.sheet, address.row, address.column),
            Location::Range { start, end } => format!(
                "range:{}:{}:{}:{}:{}",
                start.sheet, start.row, start.column, end.row, end.column
            ),
        }
    }

    pub fn label(&self, book: &Workbook) -> String {
        match self {
            Location::Workbook => "(workbook)".into(),
            Location::Sheet { sheet } => book.sheets().get(*sheet).map(|s| s.name.clone()).unwrap_or_default(),
            Location::Cell { address } => book.label(*address),
            Location::Range { start, end } => format!("{}:{}", book.label(*start), end.a1()),
        }
    }
}

/// One rule violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub finding_id: String,
    pub checker_id: String,
    pub workbook_id: String,
    pub location: Location,
    /// `Sheet!A1` style text for the location.
    pub location_label: String,
    pub severity: Severity,
    /// What was found.
    pub message: String,
    /// Why it can lead to problems.
    pub explanation: String,
    /// How to remedy it.
    pub suggestion: String,
    #[serde(default)]
    pub related_cells: Vec<CellAddress>,
}

/// Stable id derived from the finding's content, so re-runs produce equal
/// ids for equal findings.
pub fn finding_id(checker_id: &str, workbook_id: &str, location: &Location, message: &str) -> String {
    let mut hasher = Sha256::new();
    for part in [checker_id, workbook_id, &location.key(), message] {
        hasher.update(part.as_bytes());
        hasher.update([0u8]);
    }
    hex::encode(&hasher.finalize()[..8])
}

impl Finding {
    /// Builds a finding with default severity; the engine applies the
    /// scenario's severity afterwards.
    pub fn new(
        checker_id: &str,
        book: &Workbook,
        location: Location,
        message: String,
        explanation: &str,
        suggestion: String,
        related_cells: Vec<CellAddress>,
    ) -> Self {
        Self {
            finding_id: finding_id(checker_id, &book.id, &location, &message),
            checker_id: checker_id.to_string(),
            workbook_id: book.id.clone(),
            location,
            location_label: location.label(book),
            severity: Severity::default(),
            message,
            explanation: explanation.to_string(),
            suggestion,
            related_cells,
        }
    }

    /// Cell-level anchor of the finding, if any.
    pub fn cell(&self) -> Option<CellAddress> {
        match self.location {
            Location::Cell { address } => Some(address),
            Location::Range { start, .. } => Some(start),
            _ => None,
        }
    }

    pub(crate) fn sort_key(&self) -> (&str, &str, &Location, &str, &str) {
        (&self.workbook_id, &self.checker_id, &self.location, &self.message, &self.finding_id)
    }
}
