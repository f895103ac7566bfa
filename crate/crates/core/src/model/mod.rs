//! The abstract spreadsheet model.
//!
//! Every supported file format is decoded into the same [`Workbook`] shape:
//! an ordered list of sheets, each a sparse map of cells. Workbooks are
//! immutable once loaded and are shared freely between analysis tasks.

mod address;
pub mod fixture;
pub mod xlsx;

use std::borrow::Cow;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use address::{
    column_label, format_a1, parse_a1_address, parse_column_label, A1Address, CellAddress, MalformedAddress,
    MAX_COLUMNS, MAX_ROWS,
};

/// Spreadsheet error values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorCode {
    Div0,
    NA,
    Name,
    Null,
    Num,
    Ref,
    Value,
    Spill,
    Calc,
    GettingData,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 10] = [
        ErrorCode::Div0,
        ErrorCode::NA,
        ErrorCode::Name,
        ErrorCode::Null,
        ErrorCode::Num,
        ErrorCode::Ref,
        ErrorCode::Value,
        ErrorCode::Spill,
        ErrorCode::Calc,
        ErrorCode::GettingData,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Div0 => "#DIV/0!",
            ErrorCode::NA => "#N/A",
            ErrorCode::Name => "#NAME?",
            ErrorCode::Null => "#NULL!",
            ErrorCode::Num => "#NUM!",
            ErrorCode::Ref => "#REF!",
            ErrorCode::Value => "#VALUE!",
            ErrorCode::Spill => "#SPILL!",
            ErrorCode::Calc => "#CALC!",
            ErrorCode::GettingData => "#GETTING_DATA",
        }
    }
}

impl FromStr for ErrorCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        ErrorCode::ALL
            .into_iter()
            .find(|c| c.as_str() == upper)
            .ok_or_else(|| format!("unknown error code {s:?}"))
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum CellValue {
    Number(f64),
    Text(String),
    Boolean(bool),
    Error(ErrorCode),
    #[default]
    Empty,
}

impl CellValue {
    pub fn is_empty(&self) -> bool {
        matches!(self, CellValue::Empty)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellContent {
    Value(CellValue),
    Formula { source: String, cached: CellValue },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub address: CellAddress,
    pub content: CellContent,
    /// Cell protection flag; inert unless the sheet is protected.
    pub locked: bool,
}

impl Cell {
    pub fn value(address: CellAddress, value: CellValue) -> Self {
        Self {
            address,
            content: CellContent::Value(value),
            locked: true,
        }
    }

    pub fn formula(address: CellAddress, source: impl Into<String>, cached: CellValue) -> Self {
        Self {
            address,
            content: CellContent::Formula {
                source: source.into(),
                cached,
            },
            locked: true,
        }
    }

    pub fn with_locked(mut self, locked: bool) -> Self {
        self.locked = locked;
        self
    }

    pub fn empty(address: CellAddress) -> Self {
        Self::value(address, CellValue::Empty)
    }

    pub fn formula_source(&self) -> Option<&str> {
        match &self.content {
            CellContent::Formula { source, .. } => Some(source),
            CellContent::Value(_) => None,
        }
    }

    pub fn text(&self) -> Option<&str> {
        match &self.content {
            CellContent::Value(CellValue::Text(s)) => Some(s),
            _ => None,
        }
    }

    /// Whether a sparse sheet needs to store this cell at all.
    fn is_significant(&self) -> bool {
        match &self.content {
            CellContent::Formula { .. } => true,
            CellContent::Value(v) => !v.is_empty() || !self.locked,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sheet {
    pub name: String,
    pub protection_enabled: bool,
    /// Keyed by (row, column).
    cells: BTreeMap<(u32, u32), Cell>,
}

impl Sheet {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            protection_enabled: false,
            cells: BTreeMap::new(),
        }
    }

    pub fn protected(mut self, enabled: bool) -> Self {
        self.protection_enabled = enabled;
        self
    }

    /// Stores a cell, dropping it if it carries no information (locked and
    /// empty). The cell's sheet index is rewritten by [`Workbook::new`].
    pub fn insert(&mut self, cell: Cell) {
        let key = (cell.address.row, cell.address.column);
        if cell.is_significant() {
            self.cells.insert(key, cell);
        } else {
            self.cells.remove(&key);
        }
    }

    pub fn get(&self, column: u32, row: u32) -> Option<&Cell> {
        self.cells.get(&(row, column))
    }

    /// Cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.values()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn formula_count(&self) -> usize {
        self.cells().filter(|c| c.formula_source().is_some()).count()
    }

    fn reindex(&mut self, sheet: usize) {
        for cell in self.cells.values_mut() {
            cell.address.sheet = sheet;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Ooxml,
    Fixture,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    UnreadableFile {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported workbook format: {0}")]
    UnsupportedFormat(String),
    #[error("malformed workbook: {0}")]
    MalformedWorkbook(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sheet index {index} out of range (workbook has {count} sheets)")]
pub struct SheetOutOfRange {
    pub index: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Workbook {
    pub id: String,
    pub origin: String,
    sheets: Vec<Sheet>,
}

impl Workbook {
    /// Builds a workbook, checking that it has at least one sheet, a
    /// non-empty id and unique sheet names. Cell addresses are rewritten to
    /// carry their sheet's index.
    pub fn new(id: impl Into<String>, origin: impl Into<String>, mut sheets: Vec<Sheet>) -> Result<Self, LoadError> {
        let id = id.into();
        if id.trim().is_empty() {
            return Err(LoadError::MalformedWorkbook("workbook id is empty".into()));
        }
        if sheets.is_empty() {
            return Err(LoadError::MalformedWorkbook("workbook has no sheets".into()));
        }
        let mut seen = HashSet::new();
        for sheet in &sheets {
            if !seen.insert(sheet.name.to_lowercase()) {
                return Err(LoadError::MalformedWorkbook(format!("duplicate sheet name {:?}", sheet.name)));
            }
        }
        for (index, sheet) in sheets.iter_mut().enumerate() {
            sheet.reindex(index);
        }
        Ok(Self {
            id,
            origin: origin.into(),
            sheets,
        })
    }

    pub fn sheets(&self) -> &[Sheet] {
        &self.sheets
    }

    pub fn sheet(&self, index: usize) -> Result<&Sheet, SheetOutOfRange> {
        self.sheets.get(index).ok_or(SheetOutOfRange {
            index,
            count: self.sheets.len(),
        })
    }

    /// Case-insensitive lookup, as host applications resolve sheet names.
    pub fn sheet_index(&self, name: &str) -> Option<usize> {
        self.sheets.iter().position(|s| s.name.eq_ignore_ascii_case(name))
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.sheets.iter().flat_map(|s| s.cells())
    }

    pub fn cell_count(&self) -> usize {
        self.sheets.iter().map(Sheet::len).sum()
    }

    pub fn formula_count(&self) -> usize {
        self.sheets.iter().map(Sheet::formula_count).sum()
    }

    pub fn contains(&self, address: CellAddress) -> bool {
        address.sheet < self.sheets.len()
    }

    /// The stored cell, or a synthetic empty locked cell when absent.
    pub fn cell_at(&self, address: CellAddress) -> Result<Cow<'_, Cell>, SheetOutOfRange> {
        let sheet = self.sheet(address.sheet)?;
        Ok(match sheet.get(address.column, address.row) {
            Some(cell) => Cow::Borrowed(cell),
            None => Cow::Owned(Cell::empty(address)),
        })
    }

    /// `Sheet!A1` label used in reports and expert error logs.
    pub fn label(&self, address: CellAddress) -> String {
        match self.sheets.get(address.sheet) {
            Some(sheet) => format!("{}!{}", sheet.name, address.a1()),
            None => address.to_string(),
        }
    }
}

/// Free-function form of [`Workbook::cell_at`].
pub fn cell_at(workbook: &Workbook, address: CellAddress) -> Result<Cow<'_, Cell>, SheetOutOfRange> {
    workbook.cell_at(address)
}

/// Reads a workbook from disk. The format is taken from `hint`, then from
/// the file extension, then from the leading bytes. The origin records the
/// format and file name only, so reports do not depend on the working
/// directory.
pub fn load_workbook(path: impl AsRef<Path>, hint: Option<Format>) -> Result<Workbook, LoadError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| LoadError::UnreadableFile {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    load_workbook_bytes(&bytes, &name, hint)
}

/// Decodes workbook bytes. `name` is the file name used for format
/// detection and as the default workbook id.
pub fn load_workbook_bytes(bytes: &[u8], name: &str, hint: Option<Format>) -> Result<Workbook, LoadError> {
    let format = match hint.or_else(|| detect_format(name, bytes)) {
        Some(f) => f,
        None => return Err(LoadError::UnsupportedFormat(name.to_string())),
    };
    match format {
        Format::Ooxml => xlsx::read_xlsx(bytes, name),
        Format::Fixture => {
            let text = std::str::from_utf8(bytes)
                .map_err(|e| LoadError::MalformedWorkbook(format!("fixture is not UTF-8: {e}")))?;
            fixture::from_fixture_str(text, name)
        }
    }
}

fn detect_format(name: &str, bytes: &[u8]) -> Option<Format> {
    let lower = name.to_ascii_lowercase();
    if lower.ends_with(".xlsx") || lower.ends_with(".xlsm") {
        return Some(Format::Ooxml);
    }
    if lower.ends_with(".json") {
        return Some(Format::Fixture);
    }
    if bytes.starts_with(b"PK\x03\x04") {
        return Some(Format::Ooxml);
    }
    let first = bytes.iter().find(|b| !b.is_ascii_whitespace());
    (first == Some(&b'{')).then_some(Format::Fixture)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_sheet_book() -> Workbook {
        let mut sheets = Vec::new();
        for (i, name) in ["One", "Two", "Three"].iter().enumerate() {
            let mut s = Sheet::new(*name);
            s.insert(Cell::value(CellAddress::new(0, 0, 0), CellValue::Number(i as f64)));
            sheets.push(s);
        }
        Workbook::new("three", "test", sheets).unwrap()
    }

    #[test]
    fn cell_at_returns_stored_or_empty() {
        let book = three_sheet_book();
        let stored = book.cell_at(CellAddress::new(1, 0, 0)).unwrap();
        assert_eq!(stored.content, CellContent::Value(CellValue::Number(1.0)));
        let absent = book.cell_at(CellAddress::new(0, 5, 5)).unwrap();
        assert_eq!(absent.content, CellContent::Value(CellValue::Empty));
        assert!(absent.locked);
        assert_eq!(
            book.cell_at(CellAddress::new(3, 0, 0)).unwrap_err(),
            SheetOutOfRange { index: 3, count: 3 }
        );
    }

    #[test]
    fn sparse_sheet_drops_locked_empty_cells() {
        let mut s = Sheet::new("S");
        s.insert(Cell::empty(CellAddress::new(0, 0, 0)));
        assert!(s.is_empty());
        s.insert(Cell::empty(CellAddress::new(0, 1, 0)).with_locked(false));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn workbook_invariants_are_enforced() {
        assert!(Workbook::new("x", "t", vec![]).is_err());
        assert!(Workbook::new("", "t", vec![Sheet::new("A")]).is_err());
        assert!(Workbook::new("x", "t", vec![Sheet::new("A"), Sheet::new("a")]).is_err());
    }

    #[test]
    fn detects_formats() {
        assert_eq!(detect_format("a.xlsx", b""), Some(Format::Ooxml));
        assert_eq!(detect_format("a.sheet.json", b""), Some(Format::Fixture));
        assert_eq!(detect_format("upload", b"PK\x03\x04rest"), Some(Format::Ooxml));
        assert_eq!(detect_format("upload", b"  {\"sheets\":[]}"), Some(Format::Fixture));
        assert_eq!(detect_format("a.ods", b"garbage"), None);
    }

    #[test]
    fn error_codes_parse() {
        for code in ErrorCode::ALL {
            assert_eq!(code.as_str().parse::<ErrorCode>().unwrap(), code);
        }
        assert!("#BOGUS!".parse::<ErrorCode>().is_err());
    }
}
