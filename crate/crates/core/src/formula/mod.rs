//! Formula tokenizer, parser and printer, plus reference and constant
//! extraction.
//!
//! The grammar is the common A1 dialect with comma argument separators.
//! Precedence from tightest to loosest: postfix `%`, unary `+`/`-`, `^`,
//! `*` `/`, `+` `-`, `&`, comparisons. All binary operators associate to
//! the left, so `2^3^2` is `(2^3)^2` and `-2^2` is `(-2)^2`.

mod ast;
mod lexer;
mod parser;
mod printer;
mod refs;

use std::fmt;

use thiserror::Error;

pub use ast::{BinaryOp, CellRef, FormulaAst, RefTarget, UnaryOp};
pub use parser::parse_formula;
pub use printer::{canonical_number, print_formula};
pub use refs::{extract_constants, extract_references, extract_text_literals, normalize_r1c1, shift_formula_text};

/// Formula constructs the parser recognizes but does not model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unsupported {
    ArrayLiteral,
    StructuredReference,
    ExternalReference,
    DefinedName,
    ErrorLiteral,
    WholeRowOrColumn,
    DynamicRange,
    ThreeDReference,
    OmittedArgument,
}

impl fmt::Display for Unsupported {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unsupported::ArrayLiteral => "array literal",
            Unsupported::StructuredReference => "structured reference",
            Unsupported::ExternalReference => "external workbook reference",
            Unsupported::DefinedName => "defined name",
            Unsupported::ErrorLiteral => "error literal",
            Unsupported::WholeRowOrColumn => "whole row or column reference",
            Unsupported::DynamicRange => "computed range",
            Unsupported::ThreeDReference => "multi-sheet reference",
            Unsupported::OmittedArgument => "omitted function argument",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at byte {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("unsupported construct at byte {position}: {kind}")]
    Unsupported { kind: Unsupported, position: usize },
}
