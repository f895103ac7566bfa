//! The built-in practice checkers.
//!
//! Each checker is available both as a plain function over a
//! [`ParsedWorkbook`](crate::policy::ParsedWorkbook) with a typed config and
//! as a [`RuleChecker`] plugin for the registry.

mod blank_only;
mod constants;
mod consistency;
mod direction;
mod protection;

use std::sync::Arc;

use crate::policy::RuleChecker;

pub use blank_only::{check_blank_only_cells, BlankOnlyCells, BlankOnlyConfig};
pub use consistency::{check_formula_consistency, ConsistencyConfig, FormulaConsistency};
pub use constants::{check_constants_in_formulae, ConstantsConfig, ConstantsInFormulae};
pub use direction::{check_reference_direction, DirectionConfig, ReferenceDirection};
pub use protection::{check_unprotected_formula_cells, ProtectionConfig, UnprotectedFormulaCells};

pub const BLANK_ONLY_CELLS: &str = "blank-only-cells";
pub const CONSTANTS_IN_FORMULAE: &str = "constants-in-formulae";
pub const FORMULA_CONSISTENCY: &str = "formula-consistency";
pub const REFERENCE_DIRECTION: &str = "reference-direction";
pub const UNPROTECTED_FORMULA_CELLS: &str = "unprotected-formula-cells";

/// One instance of every built-in checker.
pub fn builtin_checkers() -> Vec<Arc<dyn RuleChecker>> {
    vec![
        Arc::new(BlankOnlyCells),
        Arc::new(ConstantsInFormulae),
        Arc::new(FormulaConsistency),
        Arc::new(ReferenceDirection),
        Arc::new(UnprotectedFormulaCells),
    ]
}
