use super::ast::{BinaryOp, CellRef, FormulaAst, RefTarget, UnaryOp, PREC_UNARY};
use super::lexer::{tokenize, Tok, Token};
use super::{FormulaError, Unsupported};

const MAX_DEPTH: usize = 200;

/// Parses formula text such as `=SUM(A1:A9)*2` into an AST.
pub fn parse_formula(text: &str) -> Result<FormulaAst, FormulaError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, depth: 0 };
    let ast = p.expr(0)?;
    match p.peek() {
        Tok::End => Ok(ast),
        Tok::Semicolon => Err(p.syntax("',' as argument separator")),
        _ => Err(p.syntax("operator or end of formula")),
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

fn binary_op(tok: &Tok) -> Option<BinaryOp> {
    Some(match tok {
        Tok::Plus => BinaryOp::Add,
        Tok::Minus => BinaryOp::Sub,
        Tok::Star => BinaryOp::Mul,
        Tok::Slash => BinaryOp::Div,
        Tok::Caret => BinaryOp::Pow,
        Tok::Amp => BinaryOp::Concat,
        Tok::Eq => BinaryOp::Eq,
        Tok::Ne => BinaryOp::Ne,
        Tok::Lt => BinaryOp::Lt,
        Tok::Le => BinaryOp::Le,
        Tok::Gt => BinaryOp::Gt,
        Tok::Ge => BinaryOp::Ge,
        _ => return None,
    })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        let i = (self.pos + 1).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn position(&self) -> usize {
        self.tokens[self.pos].start
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, expected: &str) -> FormulaError {
        FormulaError::Syntax {
            position: self.position(),
            expected: expected.to_string(),
        }
    }

    fn unsupported(&self, kind: Unsupported) -> FormulaError {
        FormulaError::Unsupported {
            kind,
            position: self.position(),
        }
    }

    /// Precedence climbing; every binary operator is left-associative.
    fn expr(&mut self, min_prec: u8) -> Result<FormulaAst, FormulaError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.syntax("shallower nesting"));
        }
        let mut left = self.unary()?;
        while let Some(op) = binary_op(self.peek()) {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let right = self.expr(prec + 1)?;
            left = FormulaAst::binary(op, left, right);
        }
        self.depth -= 1;
        Ok(left)
    }

    fn unary(&mut self) -> Result<FormulaAst, FormulaError> {
        let op = match self.peek() {
            Tok::Minus => UnaryOp::Neg,
            Tok::Plus => UnaryOp::Plus,
            _ => return self.postfix(),
        };
        self.bump();
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.syntax("shallower nesting"));
        }
        let operand = self.unary()?;
        self.depth -= 1;
        debug_assert!(operand.precedence() >= PREC_UNARY);
        Ok(FormulaAst::unary(op, operand))
    }

    fn postfix(&mut self) -> Result<FormulaAst, FormulaError> {
        let mut node = self.primary()?;
        while *self.peek() == Tok::Percent {
            self.bump();
            node = FormulaAst::unary(UnaryOp::Percent, node);
        }
        Ok(node)
    }

    fn primary(&mut self) -> Result<FormulaAst, FormulaError> {
        match self.peek().clone() {
            Tok::Number(n) => {
                self.bump();
                if *self.peek() == Tok::Colon {
                    return Err(self.unsupported(Unsupported::WholeRowOrColumn));
                }
                Ok(FormulaAst::Number(n))
            }
            Tok::Text(s) => {
                self.bump();
                Ok(FormulaAst::Text(s))
            }
            Tok::Cell { sheet, addr } => {
                self.bump();
                let first = CellRef {
                    sheet,
                    column: addr.column,
                    row: addr.row,
                    column_absolute: addr.column_absolute,
                    row_absolute: addr.row_absolute,
                };
                if *self.peek() != Tok::Colon {
                    return Ok(FormulaAst::Ref(RefTarget::Cell(first)));
                }
                self.bump();
                match self.peek().clone() {
                    Tok::Cell { sheet: None, addr } => {
                        self.bump();
                        let second = CellRef {
                            sheet: None,
                            column: addr.column,
                            row: addr.row,
                            column_absolute: addr.column_absolute,
                            row_absolute: addr.row_absolute,
                        };
                        if *self.peek() == Tok::Colon {
                            return Err(self.unsupported(Unsupported::DynamicRange));
                        }
                        Ok(FormulaAst::Ref(RefTarget::range(first, second)))
                    }
                    Tok::Cell { sheet: Some(_), .. } => Err(self.unsupported(Unsupported::ThreeDReference)),
                    Tok::Ident(_) | Tok::LParen => Err(self.unsupported(Unsupported::DynamicRange)),
                    _ => Err(self.syntax("cell reference after ':'")),
                }
            }
            Tok::Ident(name) => {
                if *self.peek2() == Tok::LParen {
                    return self.call(name);
                }
                if *self.peek2() == Tok::Colon {
                    return Err(self.unsupported(Unsupported::WholeRowOrColumn));
                }
                if name.eq_ignore_ascii_case("TRUE") {
                    self.bump();
                    return Ok(FormulaAst::Bool(true));
                }
                if name.eq_ignore_ascii_case("FALSE") {
                    self.bump();
                    return Ok(FormulaAst::Bool(false));
                }
                Err(self.unsupported(Unsupported::DefinedName))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr(0)?;
                if *self.peek() != Tok::RParen {
                    return Err(self.syntax("')'"));
                }
                self.bump();
                Ok(FormulaAst::Paren(Box::new(inner)))
            }
            Tok::ErrorLit => Err(self.unsupported(Unsupported::ErrorLiteral)),
            Tok::End => Err(self.syntax("operand before end of formula")),
            _ => Err(self.syntax("operand")),
        }
    }

    fn call(&mut self, name: String) -> Result<FormulaAst, FormulaError> {
        if !name.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') || name.ends_with('.') {
            return Err(self.syntax("function name"));
        }
        self.bump();
        self.bump();
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(FormulaAst::call(&name, args));
        }
        loop {
            if matches!(self.peek(), Tok::Comma | Tok::RParen) {
                return Err(self.unsupported(Unsupported::OmittedArgument));
            }
            args.push(self.expr(0)?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(FormulaAst::call(&name, args));
                }
                Tok::Semicolon => return Err(self.syntax("',' as argument separator")),
                Tok::End => return Err(self.syntax("')' before end of formula")),
                _ => return Err(self.syntax("',' or ')'")),
            }
        }
    }
}
