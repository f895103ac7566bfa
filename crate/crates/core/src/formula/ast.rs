use std::fmt;

/// A single-cell reference as written in a formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellRef {
    pub sheet: Option<String>,
    pub column: u32,
    pub row: u32,
    pub column_absolute: bool,
    pub row_absolute: bool,
}

impl CellRef {
    pub fn relative(column: u32, row: u32) -> Self {
        Self {
            sheet: None,
            column,
            row,
            column_absolute: false,
            row_absolute: false,
        }
    }

    pub fn absolute(column: u32, row: u32) -> Self {
        Self {
            sheet: None,
            column,
            row,
            column_absolute: true,
            row_absolute: true,
        }
    }

    pub fn on_sheet(mut self, sheet: impl Into<String>) -> Self {
        self.sheet = Some(sheet.into());
        self
    }
}

/// A reference found in a formula: one cell or a rectangular range.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RefTarget {
    Cell(CellRef),
    Range { start: CellRef, end: CellRef },
}

impl RefTarget {
    /// Builds a range whose start is the top-left and end the bottom-right
    /// corner. Absolute markers travel with their coordinate. The sheet of
    /// `a` qualifies both corners.
    pub fn range(a: CellRef, b: CellRef) -> Self {
        let sheet = a.sheet.clone();
        let (c0, c1) = if a.column <= b.column {
            ((a.column, a.column_absolute), (b.column, b.column_absolute))
        } else {
            ((b.column, b.column_absolute), (a.column, a.column_absolute))
        };
        let (r0, r1) = if a.row <= b.row {
            ((a.row, a.row_absolute), (b.row, b.row_absolute))
        } else {
            ((b.row, b.row_absolute), (a.row, a.row_absolute))
        };
        RefTarget::Range {
            start: CellRef {
                sheet: sheet.clone(),
                column: c0.0,
                row: r0.0,
                column_absolute: c0.1,
                row_absolute: r0.1,
            },
            end: CellRef {
                sheet,
                column: c1.0,
                row: r1.0,
                column_absolute: c1.1,
                row_absolute: r1.1,
            },
        }
    }

    pub fn sheet(&self) -> Option<&str> {
        match self {
            RefTarget::Cell(c) => c.sheet.as_deref(),
            RefTarget::Range { start, .. } => start.sheet.as_deref(),
        }
    }

    /// Bottom-right corner as (column, row).
    pub fn far_corner(&self) -> (u32, u32) {
        match self {
            RefTarget::Cell(c) => (c.column, c.row),
            RefTarget::Range { end, .. } => (end.column, end.row),
        }
    }

    /// Top-left corner as (column, row).
    pub fn near_corner(&self) -> (u32, u32) {
        match self {
            RefTarget::Cell(c) => (c.column, c.row),
            RefTarget::Range { start, .. } => (start.column, start.row),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Concat,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
            BinaryOp::Concat => "&",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "<>",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
        }
    }

    /// Binding strength; higher binds tighter.
    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 1,
            BinaryOp::Concat => 2,
            BinaryOp::Add | BinaryOp::Sub => 3,
            BinaryOp::Mul | BinaryOp::Div => 4,
            BinaryOp::Pow => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Plus,
    /// Postfix `%`.
    Percent,
}

pub(crate) const PREC_UNARY: u8 = 6;
pub(crate) const PREC_PERCENT: u8 = 7;
pub(crate) const PREC_ATOM: u8 = 8;

/// Parsed formula. Explicit parentheses are kept as [`FormulaAst::Paren`]
/// so printing reproduces the source layout.
#[derive(Debug, Clone, PartialEq)]
pub enum FormulaAst {
    Number(f64),
    Text(String),
    Bool(bool),
    Ref(RefTarget),
    Call { name: String, args: Vec<FormulaAst> },
    Binary { op: BinaryOp, left: Box<FormulaAst>, right: Box<FormulaAst> },
    Unary { op: UnaryOp, operand: Box<FormulaAst> },
    Paren(Box<FormulaAst>),
}

impl FormulaAst {
    pub fn binary(op: BinaryOp, left: FormulaAst, right: FormulaAst) -> Self {
        FormulaAst::Binary {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn unary(op: UnaryOp, operand: FormulaAst) -> Self {
        FormulaAst::Unary {
            op,
            operand: Box::new(operand),
        }
    }

    pub fn call(name: &str, args: Vec<FormulaAst>) -> Self {
        FormulaAst::Call {
            name: name.to_ascii_uppercase(),
            args,
        }
    }

    pub fn cell(r: CellRef) -> Self {
        FormulaAst::Ref(RefTarget::Cell(r))
    }

    pub(crate) fn precedence(&self) -> u8 {
        match self {
            FormulaAst::Binary { op, .. } => op.precedence(),
            FormulaAst::Unary { op: UnaryOp::Percent, .. } => PREC_PERCENT,
            FormulaAst::Unary { .. } => PREC_UNARY,
            _ => PREC_ATOM,
        }
    }

    /// Visits every node depth-first, parents before children, arguments
    /// and operands left to right.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a FormulaAst)) {
        f(self);
        match self {
            FormulaAst::Call { args, .. } => args.iter().for_each(|a| a.walk(f)),
            FormulaAst::Binary { left, right, .. } => {
                left.walk(f);
                right.walk(f);
            }
            FormulaAst::Unary { operand, .. } => operand.walk(f),
            FormulaAst::Paren(inner) => inner.walk(f),
            _ => {}
        }
    }
}

impl fmt::Display for FormulaAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print_formula(self))
    }
}
