use std::fmt::Write as _;

use crate::model::format_a1;

use super::ast::{CellRef, FormulaAst, RefTarget, UnaryOp, PREC_PERCENT, PREC_UNARY};

/// Shortest decimal text that parses back to the same value. `-0` prints
/// as `0`.
pub fn canonical_number(n: f64) -> String {
    if n == 0.0 {
        "0".to_string()
    } else {
        format!("{n}")
    }
}

pub(crate) fn sheet_prefix(out: &mut String, sheet: &str) {
    let bare = sheet.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_')
        && sheet.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.');
    if bare {
        out.push_str(sheet);
    } else {
        out.push('\'');
        out.push_str(&sheet.replace('\'', "''"));
        out.push('\'');
    }
    out.push('!');
}

fn a1_ref(out: &mut String, r: &CellRef) {
    out.push_str(&format_a1(r.column, r.row, r.column_absolute, r.row_absolute));
}

pub(crate) fn write_a1_target(out: &mut String, target: &RefTarget) {
    if let Some(sheet) = target.sheet() {
        sheet_prefix(out, sheet);
    }
    match target {
        RefTarget::Cell(c) => a1_ref(out, c),
        RefTarget::Range { start, end } => {
            a1_ref(out, start);
            out.push(':');
            a1_ref(out, end);
        }
    }
}

/// Writes `node`, wrapping it in parentheses when it binds looser than
/// `min_prec`. Parser output never needs the wrapping; hand-built trees may.
pub(crate) fn write_expr(out: &mut String, node: &FormulaAst, min_prec: u8, refs: &dyn Fn(&mut String, &RefTarget)) {
    let wrap = node.precedence() < min_prec;
    if wrap {
        out.push('(');
    }
    match node {
        FormulaAst::Number(n) => out.push_str(&canonical_number(*n)),
        FormulaAst::Text(s) => {
            out.push('"');
            out.push_str(&s.replace('"', "\"\""));
            out.push('"');
        }
        FormulaAst::Bool(b) => out.push_str(if *b { "TRUE" } else { "FALSE" }),
        FormulaAst::Ref(target) => refs(out, target),
        FormulaAst::Call { name, args } => {
            let _ = write!(out, "{}(", name.to_ascii_uppercase());
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_expr(out, arg, 0, refs);
            }
            out.push(')');
        }
        FormulaAst::Binary { op, left, right } => {
            let prec = op.precedence();
            write_expr(out, left, prec, refs);
            out.push_str(op.symbol());
            write_expr(out, right, prec + 1, refs);
        }
        FormulaAst::Unary { op: UnaryOp::Percent, operand } => {
            write_expr(out, operand, PREC_PERCENT, refs);
            out.push('%');
        }
        FormulaAst::Unary { op, operand } => {
            out.push(if *op == UnaryOp::Neg { '-' } else { '+' });
            write_expr(out, operand, PREC_UNARY, refs);
        }
        FormulaAst::Paren(inner) => {
            out.push('(');
            write_expr(out, inner, 0, refs);
            out.push(')');
        }
    }
    if wrap {
        out.push(')');
    }
}

/// Prints an AST as canonical A1 formula text: leading `=`, no whitespace,
/// uppercase function names.
pub fn print_formula(ast: &FormulaAst) -> String {
    let mut out = String::from("=");
    write_expr(&mut out, ast, 0, &write_a1_target);
    out
}
