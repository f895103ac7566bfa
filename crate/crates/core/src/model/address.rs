//! A1-style cell addressing.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of addressable columns ("A" through "ZZZ").
pub const MAX_COLUMNS: u32 = 18_278;
/// Number of addressable rows.
pub const MAX_ROWS: u32 = 1_048_576;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed cell address {text:?}: {reason}")]
pub struct MalformedAddress {
    pub text: String,
    pub reason: &'static str,
}

/// Position of a cell inside a workbook. All coordinates are 0-based.
///
/// Ordering is sheet-major, then row-major, which is the order checkers
/// visit cells in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellAddress {
    pub sheet: usize,
    pub row: u32,
    pub column: u32,
}

impl CellAddress {
    pub const fn new(sheet: usize, column: u32, row: u32) -> Self {
        Self { sheet, row, column }
    }

    /// Parses `"B4"` style text (absolute markers allowed) on the given sheet.
    pub fn parse_on(sheet: usize, text: &str) -> Result<Self, MalformedAddress> {
        let parsed = parse_a1_address(text)?;
        Ok(Self::new(sheet, parsed.column, parsed.row))
    }

    /// The A1 label without sheet qualification.
    pub fn a1(&self) -> String {
        format_a1(self.column, self.row, false, false)
    }
}

impl fmt::Display for CellAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}!{}", self.sheet, self.a1())
    }
}

/// Result of [`parse_a1_address`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct A1Address {
    pub column: u32,
    pub row: u32,
    pub column_absolute: bool,
    pub row_absolute: bool,
}

/// Converts a 0-based column index to its bijective base-26 label.
pub fn column_label(column: u32) -> String {
    let mut n = column as u64 + 1;
    let mut out = Vec::with_capacity(3);
    while n > 0 {
        let rem = ((n - 1) % 26) as u8;
        out.push(b'A' + rem);
        n = (n - 1) / 26;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

/// Decodes a column label (case-insensitive). Returns `None` for empty,
/// non-alphabetic or out-of-range labels.
pub fn parse_column_label(label: &str) -> Option<u32> {
    if label.is_empty() || label.len() > 3 {
        return None;
    }
    let mut n: u32 = 0;
    for b in label.bytes() {
        if !b.is_ascii_alphabetic() {
            return None;
        }
        n = n * 26 + u32::from(b.to_ascii_uppercase() - b'A' + 1);
    }
    (n <= MAX_COLUMNS).then(|| n - 1)
}

pub fn format_a1(column: u32, row: u32, column_absolute: bool, row_absolute: bool) -> String {
    let mut s = String::with_capacity(8);
    if column_absolute {
        s.push('$');
    }
    s.push_str(&column_label(column));
    if row_absolute {
        s.push('$');
    }
    s.push_str(&(row + 1).to_string());
    s
}

/// Parses `[$]letters[$]digits`. Rows are 1-based in text and 0-based in
/// the result.
pub fn parse_a1_address(text: &str) -> Result<A1Address, MalformedAddress> {
    let err = |reason| MalformedAddress {
        text: text.to_string(),
        reason,
    };
    let bytes = text.as_bytes();
    let mut i = 0;
    let column_absolute = bytes.first() == Some(&b'$');
    if column_absolute {
        i += 1;
    }
    let letters_start = i;
    while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
        i += 1;
    }
    if i == letters_start {
        return Err(err("missing column letters"));
    }
    let column = parse_column_label(&text[letters_start..i]).ok_or_else(|| err("column out of range"))?;
    let row_absolute = bytes.get(i) == Some(&b'$');
    if row_absolute {
        i += 1;
    }
    let digits_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i == digits_start {
        return Err(err("missing row number"));
    }
    if i != bytes.len() {
        return Err(err("trailing characters"));
    }
    let row: u64 = text[digits_start..i].parse().map_err(|_| err("row out of range"))?;
    if row == 0 || row > u64::from(MAX_ROWS) {
        return Err(err("row out of range"));
    }
    Ok(A1Address {
        column,
        row: row as u32 - 1,
        column_absolute,
        row_absolute,
    })
}
