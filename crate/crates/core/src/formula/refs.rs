use std::fmt::Write as _;

use crate::model::{format_a1, CellAddress, MAX_COLUMNS, MAX_ROWS};

use super::ast::{CellRef, FormulaAst, RefTarget, UnaryOp};
use super::lexer::{tokenize, Tok};
use super::printer::{sheet_prefix, write_expr};
use super::FormulaError;

/// Every reference in the formula, depth-first and left to right.
/// Duplicates are kept.
pub fn extract_references(ast: &FormulaAst) -> Vec<RefTarget> {
    let mut out = Vec::new();
    ast.walk(&mut |node| {
        if let FormulaAst::Ref(r) = node {
            out.push(r.clone());
        }
    });
    out
}

/// Numeric literals in depth-first order. A minus sign applied directly to
/// a literal yields one negative constant.
pub fn extract_constants(ast: &FormulaAst) -> Vec<f64> {
    let mut out = Vec::new();
    collect_constants(ast, &mut out);
    out
}

fn collect_constants(node: &FormulaAst, out: &mut Vec<f64>) {
    match node {
        FormulaAst::Number(n) => out.push(*n),
        FormulaAst::Unary { op: UnaryOp::Neg, operand } => match operand.as_ref() {
            FormulaAst::Number(n) => out.push(-n),
            other => collect_constants(other, out),
        },
        FormulaAst::Unary { operand, .. } => collect_constants(operand, out),
        FormulaAst::Call { args, .. } => args.iter().for_each(|a| collect_constants(a, out)),
        FormulaAst::Binary { left, right, .. } => {
            collect_constants(left, out);
            collect_constants(right, out);
        }
        FormulaAst::Paren(inner) => collect_constants(inner, out),
        FormulaAst::Text(_) | FormulaAst::Bool(_) | FormulaAst::Ref(_) => {}
    }
}

/// String literals in depth-first order.
pub fn extract_text_literals(ast: &FormulaAst) -> Vec<String> {
    let mut out = Vec::new();
    ast.walk(&mut |node| {
        if let FormulaAst::Text(s) = node {
            out.push(s.clone());
        }
    });
    out
}

fn r1c1_part(out: &mut String, axis: char, index: u32, origin: u32, absolute: bool) {
    out.push(axis);
    if absolute {
        let _ = write!(out, "{}", index + 1);
    } else {
        let _ = write!(out, "[{}]", i64::from(index) - i64::from(origin));
    }
}

fn r1c1_cell(out: &mut String, r: &CellRef, origin: CellAddress) {
    r1c1_part(out, 'R', r.row, origin.row, r.row_absolute);
    r1c1_part(out, 'C', r.column, origin.column, r.column_absolute);
}

/// Orders the two bounds of one range axis absolute-first, then by value.
/// Copying a range whose bounds mix anchoring can swap which corner is the
/// smaller one; ordering the bounds this way keeps the copy's form equal.
fn axis_bounds(a: (u32, bool), b: (u32, bool), origin: u32) -> [(u32, bool); 2] {
    let key = |(index, absolute): (u32, bool)| {
        if absolute {
            (0, i64::from(index))
        } else {
            (1, i64::from(index) - i64::from(origin))
        }
    };
    if key(a) <= key(b) {
        [a, b]
    } else {
        [b, a]
    }
}

fn r1c1_range(out: &mut String, start: &CellRef, end: &CellRef, origin: CellAddress) {
    let rows = axis_bounds((start.row, start.row_absolute), (end.row, end.row_absolute), origin.row);
    let columns = axis_bounds(
        (start.column, start.column_absolute),
        (end.column, end.column_absolute),
        origin.column,
    );
    for i in 0..2 {
        if i == 1 {
            out.push(':');
        }
        r1c1_part(out, 'R', rows[i].0, origin.row, rows[i].1);
        r1c1_part(out, 'C', columns[i].0, origin.column, columns[i].1);
    }
}

/// Canonical, position-independent text of a formula: relative references
/// become `R[dr]C[dc]` offsets from `origin`, absolute components `R<n>` /
/// `C<n>`. Two formulas that are copies of each other normalize equally.
pub fn normalize_r1c1(ast: &FormulaAst, origin: CellAddress) -> String {
    let mut out = String::new();
    let refs = |out: &mut String, target: &RefTarget| {
        if let Some(sheet) = target.sheet() {
            sheet_prefix(out, sheet);
        }
        match target {
            RefTarget::Cell(c) => r1c1_cell(out, c, origin),
            RefTarget::Range { start, end } => r1c1_range(out, start, end, origin),
        }
    };
    write_expr(&mut out, ast, 0, &refs);
    out
}

fn shift(index: u32, delta: i64, absolute: bool, limit: u32) -> Option<u32> {
    if absolute {
        return Some(index);
    }
    let moved = i64::from(index) + delta;
    (0..i64::from(limit)).contains(&moved).then_some(moved as u32)
}

/// Rewrites the relative references in formula text as if the formula were
/// copied `rows` down and `columns` right. Everything else, including
/// whitespace, is preserved. References pushed off the grid become `#REF!`.
pub fn shift_formula_text(text: &str, rows: i64, columns: i64) -> Result<String, FormulaError> {
    let tokens = tokenize(text)?;
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for token in &tokens {
        let Tok::Cell { addr, .. } = &token.tok else { continue };
        let slice = &text[token.start..token.end];
        let prefix_len = slice.rfind('!').map_or(0, |i| i + 1);
        out.push_str(&text[cursor..token.start + prefix_len]);
        let moved = shift(addr.column, columns, addr.column_absolute, MAX_COLUMNS)
            .zip(shift(addr.row, rows, addr.row_absolute, MAX_ROWS));
        match moved {
            Some((c, r)) => out.push_str(&format_a1(c, r, addr.column_absolute, addr.row_absolute)),
            None => out.push_str("#REF!"),
        }
        cursor = token.end;
    }
    out.push_str(&text[cursor..]);
    Ok(out)
}
