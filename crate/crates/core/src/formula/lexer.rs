use crate::model::{parse_a1_address, A1Address};

use super::{FormulaError, Unsupported};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Number(f64),
    Text(String),
    /// A single-cell A1 reference, optionally sheet-qualified.
    Cell { sheet: Option<String>, addr: A1Address },
    /// Identifier that is not a cell reference: function names, booleans,
    /// defined names. Original case preserved.
    Ident(String),
    ErrorLit,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Amp,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Percent,
    LParen,
    RParen,
    Comma,
    Colon,
    Semicolon,
    End,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    /// Byte span in the original text.
    pub start: usize,
    pub end: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '\\' || c == '$'
}

fn syntax(position: usize, expected: &str) -> FormulaError {
    FormulaError::Syntax {
        position,
        expected: expected.to_string(),
    }
}

fn unsupported(kind: Unsupported, position: usize) -> FormulaError {
    FormulaError::Unsupported { kind, position }
}

/// Splits formula text (including its leading `=`) into tokens. Whitespace
/// between tokens is insignificant.
pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, FormulaError> {
    let mut lx = Lexer { text, pos: 0, out: Vec::new() };
    lx.run()?;
    Ok(lx.out)
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
    out: Vec<Token>,
}

impl Lexer<'_> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.text.get(self.pos + offset..).and_then(|s| s.chars().next())
    }

    fn push(&mut self, tok: Tok, start: usize) {
        self.out.push(Token { tok, start, end: self.pos });
    }

    fn run(&mut self) -> Result<(), FormulaError> {
        let leading = self.text.len() - self.text.trim_start().len();
        self.pos = leading;
        if self.peek() != Some('=') {
            return Err(syntax(self.pos, "'=' at start of formula"));
        }
        self.pos += 1;
        loop {
            while let Some(c) = self.peek() {
                if c.is_whitespace() {
                    self.pos += c.len_utf8();
                } else {
                    break;
                }
            }
            let start = self.pos;
            let Some(c) = self.peek() else {
                self.push(Tok::End, start);
                return Ok(());
            };
            let simple = match c {
                '+' => Some(Tok::Plus),
                '-' => Some(Tok::Minus),
                '*' => Some(Tok::Star),
                '/' => Some(Tok::Slash),
                '^' => Some(Tok::Caret),
                '&' => Some(Tok::Amp),
                '=' => Some(Tok::Eq),
                '%' => Some(Tok::Percent),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                ',' => Some(Tok::Comma),
                ':' => Some(Tok::Colon),
                ';' => Some(Tok::Semicolon),
                _ => None,
            };
            if let Some(tok) = simple {
                self.pos += 1;
                self.push(tok, start);
                continue;
            }
            match c {
                '{' => return Err(unsupported(Unsupported::ArrayLiteral, start)),
                '[' => return Err(unsupported(Unsupported::ExternalReference, start)),
                '<' => {
                    self.pos += 1;
                    let tok = match self.peek() {
                        Some('=') => {
                            self.pos += 1;
                            Tok::Le
                        }
                        Some('>') => {
                            self.pos += 1;
                            Tok::Ne
                        }
                        _ => Tok::Lt,
                    };
                    self.push(tok, start);
                }
                '>' => {
                    self.pos += 1;
                    let tok = if self.peek() == Some('=') {
                        self.pos += 1;
                        Tok::Ge
                    } else {
                        Tok::Gt
                    };
                    self.push(tok, start);
                }
                '"' => self.string(start)?,
                '\'' => self.quoted_sheet(start)?,
                '#' => self.error_literal(start)?,
                '0'..='9' => self.number(start)?,
                '.' if self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => self.number(start)?,
                c if is_ident_char(c) => self.word(start)?,
                _ => return Err(syntax(start, "operator, operand or end of formula")),
            }
        }
    }

    fn string(&mut self, start: usize) -> Result<(), FormulaError> {
        self.pos += 1;
        let mut s = String::new();
        loop {
            match self.peek() {
                None => return Err(syntax(self.text.len(), "closing '\"'")),
                Some('"') => {
                    self.pos += 1;
                    if self.peek() == Some('"') {
                        self.pos += 1;
                        s.push('"');
                    } else {
                        break;
                    }
                }
                Some(c) => {
                    self.pos += c.len_utf8();
                    s.push(c);
                }
            }
        }
        self.push(Tok::Text(s), start);
        Ok(())
    }

    fn quoted_sheet(&mut self, start: usize) -> Result<(), FormulaError> {
        self.pos += 1;
        let mut name = String::new();
        loop {
            match self.peek() {
                None => return Err(syntax(self.text.len(), "closing \"'\"")),
                Some('\'') => {
                    self.pos += 1;
                    if self.peek() == Some('\'') {
                        self.pos += 1;
                        name.push('\'');
                    } else {
                        break;
                    }
                }
                Some(c) => {
                    self.pos += c.len_utf8();
                    name.push(c);
                }
            }
        }
        if name.starts_with('[') {
            return Err(unsupported(Unsupported::ExternalReference, start));
        }
        if name.is_empty() {
            return Err(syntax(start, "sheet name"));
        }
        if self.peek() != Some('!') {
            return Err(syntax(self.pos, "'!' after quoted sheet name"));
        }
        self.pos += 1;
        self.sheet_cell(start, name)
    }

    /// After `Sheet!`: expects a cell address.
    fn sheet_cell(&mut self, start: usize, sheet: String) -> Result<(), FormulaError> {
        let word_start = self.pos;
        while self.peek().is_some_and(is_ident_char) {
            self.pos += 1;
        }
        let word = &self.text[word_start..self.pos];
        if word.starts_with('#') || self.peek() == Some('#') {
            return Err(unsupported(Unsupported::ErrorLiteral, start));
        }
        match parse_a1_address(word) {
            Ok(addr) => {
                self.push(Tok::Cell { sheet: Some(sheet), addr }, start);
                Ok(())
            }
            Err(_) if word.is_empty() => Err(syntax(word_start, "cell reference after '!'")),
            Err(_) => {
                if self.peek() == Some(':') || word.bytes().all(|b| b.is_ascii_digit() || b == b'$') {
                    Err(unsupported(Unsupported::WholeRowOrColumn, start))
                } else {
                    Err(unsupported(Unsupported::DefinedName, start))
                }
            }
        }
    }

    fn error_literal(&mut self, start: usize) -> Result<(), FormulaError> {
        self.pos += 1;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '/' || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if matches!(self.peek(), Some('!') | Some('?')) {
            self.pos += 1;
        }
        if self.pos - start < 3 {
            return Err(syntax(start, "error literal"));
        }
        self.push(Tok::ErrorLit, start);
        Ok(())
    }

    fn number(&mut self, start: usize) -> Result<(), FormulaError> {
        let bytes = self.text.as_bytes();
        let mut i = self.pos;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            let digits = j;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j == digits {
                return Err(syntax(j, "exponent digits"));
            }
            i = j;
        }
        let lexeme = &self.text[self.pos..i];
        let value: f64 = lexeme.parse().map_err(|_| syntax(start, "number"))?;
        if !value.is_finite() {
            return Err(syntax(start, "finite number"));
        }
        self.pos = i;
        if self.peek().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
            return Err(syntax(self.pos, "operator after number"));
        }
        self.push(Tok::Number(value), start);
        Ok(())
    }

    fn word(&mut self, start: usize) -> Result<(), FormulaError> {
        while self.peek().is_some_and(is_ident_char) {
            self.pos += 1;
        }
        let word = &self.text[start..self.pos];
        if self.peek() == Some('!') {
            if word.contains('$') {
                return Err(syntax(start, "sheet name"));
            }
            self.pos += 1;
            return self.sheet_cell(start, word.to_string());
        }
        if self.peek() == Some('[') {
            return Err(unsupported(Unsupported::StructuredReference, start));
        }
        if self.peek() != Some('(') {
            if let Ok(addr) = parse_a1_address(word) {
                self.push(Tok::Cell { sheet: None, addr }, start);
                return Ok(());
            }
        }
        if word.contains('$') {
            // `$A:$A`, `A$` and friends: not a cell, not a name.
            if self.peek() == Some(':') || word.trim_start_matches('$').bytes().all(|b| b.is_ascii_alphabetic()) {
                return Err(unsupported(Unsupported::WholeRowOrColumn, start));
            }
            return Err(syntax(start, "cell reference"));
        }
        self.push(Tok::Ident(word.to_string()), start);
        Ok(())
    }
}
