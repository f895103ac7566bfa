use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::formula::{parse_formula, FormulaAst};
use crate::model::{CellAddress, Workbook};

/// A formula the parser could not model. Checkers ignore the cell and the
/// report lists it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedFormula {
    pub workbook_id: String,
    pub address: CellAddress,
    pub location_label: String,
    pub formula: String,
    pub reason: String,
}

/// A workbook together with the parse of every formula cell, shared by
/// all checkers of a run so each formula is parsed once.
#[derive(Debug)]
pub struct ParsedWorkbook<'a> {
    pub book: &'a Workbook,
    formulas: BTreeMap<CellAddress, FormulaAst>,
    skipped: Vec<SkippedFormula>,
}

impl<'a> ParsedWorkbook<'a> {
    pub fn new(book: &'a Workbook) -> Self {
        let mut formulas = BTreeMap::new();
        let mut skipped = Vec::new();
        for cell in book.cells() {
            let Some(source) = cell.formula_source() else { continue };
            match parse_formula(source) {
                Ok(ast) => {
                    formulas.insert(cell.address, ast);
                }
                Err(e) => skipped.push(SkippedFormula {
                    workbook_id: book.id.clone(),
                    address: cell.address,
                    location_label: book.label(cell.address),
                    formula: source.to_string(),
                    reason: e.to_string(),
                }),
            }
        }
        Self { book, formulas, skipped }
    }

    /// Parsed formulas in sheet, row, column order.
    pub fn formulas(&self) -> impl Iterator<Item = (CellAddress, &FormulaAst)> {
        self.formulas.iter().map(|(a, f)| (*a, f))
    }

    pub fn formula_at(&self, address: CellAddress) -> Option<&FormulaAst> {
        self.formulas.get(&address)
    }

    pub fn skipped(&self) -> &[SkippedFormula] {
        &self.skipped
    }
}
