use serde_json::json;

use crate::formula::extract_references;
use crate::model::CellAddress;
use crate::policy::{CheckerDescriptor, Finding, Location, ParamSpec, ParamType, Params, ParsedWorkbook, RuleChecker};

use super::REFERENCE_DIRECTION as ID;

const EXPLANATION: &str = "Spreadsheets are read from top left to bottom right. Formulas that depend on cells \
to their right or below break that reading order, which makes the calculation flow hard to follow and audit.";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DirectionConfig {
    /// Judge references into other sheets by their coordinates as well.
    pub check_cross_sheet: bool,
}

impl DirectionConfig {
    pub fn from_params(params: &Params) -> Self {
        Self {
            check_cross_sheet: params.bool("check_cross_sheet"),
        }
    }
}

/// One finding per formula cell referring to a cell right of or below
/// itself. Ranges are judged by their bottom-right corner, which goes into
/// `related_cells`. References to sheets the workbook does not contain are
/// ignored.
pub fn check_reference_direction(book: &ParsedWorkbook<'_>, config: &DirectionConfig) -> Vec<Finding> {
    let wb = book.book;
    let mut findings = Vec::new();
    for (host, ast) in book.formulas() {
        let mut offending: Vec<CellAddress> = Vec::new();
        for target in extract_references(ast) {
            let sheet = match target.sheet() {
                None => host.sheet,
                Some(name) => match wb.sheet_index(name) {
                    Some(i) => i,
                    None => continue,
                },
            };
            if sheet != host.sheet && !config.check_cross_sheet {
                continue;
            }
            let (column, row) = target.far_corner();
            let corner = CellAddress::new(sheet, column, row);
            if (column > host.column || row > host.row) && !offending.contains(&corner) {
                offending.push(corner);
            }
        }
        if offending.is_empty() {
            continue;
        }
        let labels: Vec<String> = offending.iter().map(|a| wb.label(*a)).collect();
        findings.push(Finding::new(
            ID,
            wb,
            Location::Cell { address: host },
            format!("Formula in {} refers right of or below itself: {}", wb.label(host), labels.join(", ")),
            EXPLANATION,
            "Rearrange the layout so inputs sit left of or above the formulas that use them.".into(),
            offending,
        ));
    }
    findings
}

pub struct ReferenceDirection;

impl RuleChecker for ReferenceDirection {
    fn descriptor(&self) -> CheckerDescriptor {
        CheckerDescriptor {
            id: ID.into(),
            display_name: "Reference direction".into(),
            summary: "Formulae which refer to the right or below".into(),
            param_schema: vec![ParamSpec::new(
                "check_cross_sheet",
                ParamType::Bool,
                json!(false),
                "Also judge references into other sheets by their coordinates",
            )],
        }
    }

    fn check(&self, workbook: &ParsedWorkbook<'_>, params: &Params) -> Vec<Finding> {
        check_reference_direction(workbook, &DirectionConfig::from_params(params))
    }
}
