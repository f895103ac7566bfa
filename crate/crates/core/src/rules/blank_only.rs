use serde_json::json;

use crate::policy::{CheckerDescriptor, Finding, Location, ParamSpec, ParamType, Params, ParsedWorkbook, RuleChecker};

use super::BLANK_ONLY_CELLS as ID;

const EXPLANATION: &str = "A cell holding only blanks looks empty but is not: counting, lookup and \
emptiness tests treat it as text, which skews results without any visible cause.";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlankOnlyConfig {
    /// Treat tabs, line breaks and other Unicode whitespace like spaces.
    pub include_all_whitespace: bool,
}

impl BlankOnlyConfig {
    pub fn from_params(params: &Params) -> Self {
        Self {
            include_all_whitespace: params.bool("include_all_whitespace"),
        }
    }

    fn is_blank_only(&self, text: &str) -> bool {
        !text.is_empty()
            && text
                .chars()
                .all(|c| c == ' ' || (self.include_all_whitespace && c.is_whitespace()))
    }
}

/// One finding per text cell consisting only of blanks.
pub fn check_blank_only_cells(book: &ParsedWorkbook<'_>, config: &BlankOnlyConfig) -> Vec<Finding> {
    let wb = book.book;
    wb.cells()
        .filter(|cell| cell.text().is_some_and(|t| config.is_blank_only(t)))
        .map(|cell| {
            let n = cell.text().map_or(0, |t| t.chars().count());
            Finding::new(
                ID,
                wb,
                Location::Cell { address: cell.address },
                format!(
                    "Cell {} contains only blanks ({n} character{})",
                    wb.label(cell.address),
                    if n == 1 { "" } else { "s" }
                ),
                EXPLANATION,
                "Clear the cell.".into(),
                Vec::new(),
            )
        })
        .collect()
}

pub struct BlankOnlyCells;

impl RuleChecker for BlankOnlyCells {
    fn descriptor(&self) -> CheckerDescriptor {
        CheckerDescriptor {
            id: ID.into(),
            display_name: "Blank-only cells".into(),
            summary: "Cells which consist only of one or more blanks".into(),
            param_schema: vec![ParamSpec::new(
                "include_all_whitespace",
                ParamType::Bool,
                json!(false),
                "Also report cells made of tabs, line breaks or other whitespace",
            )],
        }
    }

    fn check(&self, workbook: &ParsedWorkbook<'_>, params: &Params) -> Vec<Finding> {
        check_blank_only_cells(workbook, &BlankOnlyConfig::from_params(params))
    }
}
