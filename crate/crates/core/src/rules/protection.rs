use serde_json::json;

use crate::policy::{CheckerDescriptor, Finding, Location, ParamSpec, ParamType, Params, ParsedWorkbook, RuleChecker};

use super::UNPROTECTED_FORMULA_CELLS as ID;

const EXPLANATION: &str = "Formulas that are not protected can be overwritten by accident, for example when \
someone types a value over them, and the spreadsheet keeps working with the wrong number.";

#[derive(Debug, Clone, PartialEq)]
pub struct ProtectionConfig {
    /// When set, the locked flag only counts on protected sheets.
    pub require_sheet_protection: bool,
}

impl Default for ProtectionConfig {
    fn default() -> Self {
        Self {
            require_sheet_protection: true,
        }
    }
}

impl ProtectionConfig {
    pub fn from_params(params: &Params) -> Self {
        Self {
            require_sheet_protection: params.bool("require_sheet_protection"),
        }
    }
}

/// One finding per formula cell that is not effectively protected.
/// Formulas the parser skipped are still checked: protection does not
/// depend on formula structure.
pub fn check_unprotected_formula_cells(book: &ParsedWorkbook<'_>, config: &ProtectionConfig) -> Vec<Finding> {
    let wb = book.book;
    wb.cells()
        .filter(|cell| cell.formula_source().is_some())
        .filter(|cell| {
            let sheet_protected = wb.sheets()[cell.address.sheet].protection_enabled;
            !(cell.locked && (sheet_protected || !config.require_sheet_protection))
        })
        .map(|cell| {
            let sheet_protected = wb.sheets()[cell.address.sheet].protection_enabled;
            let reason = match (cell.locked, sheet_protected) {
                (false, _) => "the cell is not locked",
                (true, false) => "its sheet is not protected",
                (true, true) => unreachable!("effectively protected cells are filtered out"),
            };
            Finding::new(
                ID,
                wb,
                Location::Cell { address: cell.address },
                format!("Formula in {} is unprotected: {reason}", wb.label(cell.address)),
                EXPLANATION,
                "Lock the cell and enable protection for its sheet.".into(),
                Vec::new(),
            )
        })
        .collect()
}

pub struct UnprotectedFormulaCells;

impl RuleChecker for UnprotectedFormulaCells {
    fn descriptor(&self) -> CheckerDescriptor {
        CheckerDescriptor {
            id: ID.into(),
            display_name: "Unprotected formula cells".into(),
            summary: "Formulae in cells which do not have cell protection enabled".into(),
            param_schema: vec![ParamSpec::new(
                "require_sheet_protection",
                ParamType::Bool,
                json!(true),
                "Treat a locked cell as protected only when its sheet is protected",
            )],
        }
    }

    fn check(&self, workbook: &ParsedWorkbook<'_>, params: &Params) -> Vec<Finding> {
        check_unprotected_formula_cells(workbook, &ProtectionConfig::from_params(params))
    }
}
