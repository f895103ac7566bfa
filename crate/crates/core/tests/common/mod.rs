//! Random fixture generation and brute-force checker oracles.
//!
//! The generator builds workbooks from a structured description, so the
//! oracles below know every reference and constant of every formula
//! without going through the library's parser.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use sheet_workbench::evaluation::{ExpertRating, Rating};
use sheet_workbench::model::fixture::from_fixture_str;
use sheet_workbench::model::{CellAddress, Workbook};
use sheet_workbench::policy::Finding;

pub fn col_label(mut c: u32) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'A' + (c % 26) as u8);
        if c < 26 {
            break;
        }
        c = c / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).unwrap()
}

/// Shortest decimal rendering; negative zero prints as zero.
pub fn canon(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenRef {
    pub sheet: Option<String>,
    pub col: u32,
    pub row: u32,
    pub col_abs: bool,
    pub row_abs: bool,
}

impl GenRef {
    fn text(&self) -> String {
        format!(
            "{}{}{}{}",
            if self.col_abs { "$" } else { "" },
            col_label(self.col),
            if self.row_abs { "$" } else { "" },
            self.row + 1
        )
    }

    fn shifted(&self, dr: u32, dc: u32) -> Self {
        let mut r = self.clone();
        if !r.row_abs {
            r.row += dr;
        }
        if !r.col_abs {
            r.col += dc;
        }
        r
    }
}

fn sheet_prefix(sheet: &Option<String>) -> String {
    match sheet {
        None => String::new(),
        Some(s) if s.chars().all(|c| c.is_ascii_alphanumeric()) => format!("{s}!"),
        Some(s) => format!("'{s}'!"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Ref(GenRef),
    /// Corners as written; the second never carries a sheet.
    Range(GenRef, GenRef),
    /// Literal as written, its value, and whether a minus sign precedes it.
    Num { text: &'static str, value: f64, negative: bool },
    Text(&'static str),
}

impl Term {
    fn text(&self) -> String {
        match self {
            Term::Ref(r) => format!("{}{}", sheet_prefix(&r.sheet), r.text()),
            Term::Range(a, b) => format!("{}{}:{}", sheet_prefix(&a.sheet), a.text(), b.text()),
            Term::Num { text, negative, .. } => format!("{}{text}", if *negative { "-" } else { "" }),
            Term::Text(s) => format!("\"{s}\""),
        }
    }

    fn shifted(&self, dr: u32, dc: u32) -> Self {
        match self {
            Term::Ref(r) => Term::Ref(r.shifted(dr, dc)),
            Term::Range(a, b) => Term::Range(a.shifted(dr, dc), b.shifted(dr, dc)),
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenFormula {
    pub terms: Vec<Term>,
    /// `ops[i]` joins `terms[i]` and `terms[i + 1]`.
    pub ops: Vec<&'static str>,
    pub wrap: Option<&'static str>,
    pub paren: bool,
}

impl GenFormula {
    pub fn text(&self) -> String {
        let mut body = self.terms[0].text();
        for (op, t) in self.ops.iter().zip(&self.terms[1..]) {
            body.push_str(op);
            body.push_str(&t.text());
        }
        if self.paren {
            body = format!("({body})");
        }
        if let Some(f) = self.wrap {
            body = format!("{f}({body})");
        }
        format!("={body}")
    }

    fn shifted(&self, dr: u32, dc: u32) -> Self {
        Self {
            terms: self.terms.iter().map(|t| t.shifted(dr, dc)).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GenCell {
    Number(f64),
    Text(&'static str),
    Formula(GenFormula),
    /// A formula the parser rejects as unsupported.
    Unsupported(&'static str),
    /// Unlocked and empty.
    Blank,
}

#[derive(Debug, Clone)]
pub struct GenSheet {
    pub name: String,
    pub protection: bool,
    /// (row, col) -> (cell, locked)
    pub cells: BTreeMap<(u32, u32), (GenCell, bool)>,
}

#[derive(Debug, Clone)]
pub struct GenBook {
    pub id: String,
    pub sheets: Vec<GenSheet>,
}

impl GenBook {
    pub fn to_fixture_json(&self) -> String {
        let sheets: Vec<Value> = self
            .sheets
            .iter()
            .map(|s| {
                let mut cells = Map::new();
                for (&(row, col), (cell, locked)) in &s.cells {
                    let mut c = match cell {
                        GenCell::Number(n) => json!({ "value": n }),
                        GenCell::Text(t) => json!({ "value": t }),
                        GenCell::Formula(f) => json!({ "formula": f.text() }),
                        GenCell::Unsupported(f) => json!({ "formula": f }),
                        GenCell::Blank => json!({}),
                    };
                    c["locked"] = json!(locked);
                    cells.insert(format!("{}{}", col_label(col), row + 1), c);
                }
                json!({ "name": s.name, "protection_enabled": s.protection, "cells": cells })
            })
            .collect();
        json!({ "id": self.id, "sheets": sheets }).to_string()
    }

    pub fn workbook(&self) -> Workbook {
        from_fixture_str(&self.to_fixture_json(), &self.id).expect("generated fixture loads")
    }

    pub fn cell_count(&self) -> usize {
        self.sheets.iter().map(|s| s.cells.len()).sum()
    }

    fn sheet_index(&self, name: &str) -> Option<usize> {
        self.sheets.iter().position(|s| s.name.eq_ignore_ascii_case(name))
    }

    /// Every parseable formula with its address.
    fn formulas(&self) -> impl Iterator<Item = (CellAddress, &GenFormula)> {
        self.sheets.iter().enumerate().flat_map(|(si, s)| {
            s.cells.iter().filter_map(move |(&(row, col), (cell, _))| match cell {
                GenCell::Formula(f) => Some((CellAddress::new(si, col, row), f)),
                _ => None,
            })
        })
    }
}

pub const NUMBERS: &[(&str, f64)] = &[
    ("1", 1.0),
    ("1.0", 1.0),
    ("2", 2.0),
    ("2.5", 2.5),
    ("2.50", 2.5),
    ("0.5", 0.5),
    ("1.19", 1.19),
    ("100", 100.0),
    ("1E3", 1000.0),
    ("0.19", 0.19),
    ("7", 7.0),
    ("0", 0.0),
];
pub const TEXT_LITERALS: &[&str] = &["x", "total", "1"];
pub const TEXT_VALUES: &[&str] = &[
    " ", "  ", "\t", " \t ", "", "abc", " a ", "\u{a0}", "\n", "\u{3000}", "Total",
];
pub const UNSUPPORTED: &[&str] = &["=SUM(A:A)", "=Rate*2", "={1,2}", "=#N/A", "=SUM(1,,2)", "=Table1[Col]"];
const SHEET_NAMES: &[&str] = &["Sheet1", "Data", "My Sheet", "calc"];
const OPS: &[&str] = &["+", "-", "*", "/", "&"];
const GRID_COLS: u32 = 12;
const GRID_ROWS: u32 = 15;

pub struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn gen_ref(&mut self, sheets: &[String], near: Option<(u32, u32)>) -> GenRef {
        let rng = &mut self.rng;
        let sheet = if rng.gen_bool(0.2) {
            let pick = if rng.gen_bool(0.15) { "Ghost".to_string() } else { sheets.choose(rng).unwrap().clone() };
            Some(if rng.gen_bool(0.3) { pick.to_lowercase() } else { pick })
        } else {
            None
        };
        let (col, row) = match near {
            Some((c, r)) => (
                (c as i64 + rng.gen_range(-2..=1)).max(0) as u32,
                (r as i64 + rng.gen_range(-2..=1)).max(0) as u32,
            ),
            None => (rng.gen_range(0..GRID_COLS), rng.gen_range(0..GRID_ROWS)),
        };
        GenRef {
            sheet,
            col,
            row,
            col_abs: rng.gen_bool(0.15),
            row_abs: rng.gen_bool(0.15),
        }
    }

    fn gen_term(&mut self, sheets: &[String], near: Option<(u32, u32)>) -> Term {
        let roll: f64 = self.rng.gen();
        if roll < 0.45 {
            Term::Ref(self.gen_ref(sheets, near))
        } else if roll < 0.6 {
            let a = self.gen_ref(sheets, near);
            let mut b = self.gen_ref(sheets, near);
            b.sheet = None;
            Term::Range(a, b)
        } else if roll < 0.9 {
            let &(text, value) = NUMBERS.choose(&mut self.rng).unwrap();
            Term::Num {
                text,
                value,
                negative: self.rng.gen_bool(0.15),
            }
        } else {
            Term::Text(TEXT_LITERALS.choose(&mut self.rng).unwrap())
        }
    }

    pub fn gen_formula(&mut self, sheets: &[String], near: Option<(u32, u32)>) -> GenFormula {
        let n = self.rng.gen_range(1..=4);
        let terms: Vec<Term> = (0..n).map(|_| self.gen_term(sheets, near)).collect();
        let ops = (1..n).map(|_| *OPS.choose(&mut self.rng).unwrap()).collect();
        let wrap = match self.rng.gen_range(0..10) {
            0..=1 => Some("SUM"),
            2 => Some("ABS"),
            _ => None,
        };
        GenFormula {
            terms,
            ops,
            wrap,
            paren: self.rng.gen_bool(0.15),
        }
    }

    /// A random workbook of at most `max_cells` cells, mixing scattered
    /// cells with copied formula blocks so that formula runs occur.
    pub fn gen_book(&mut self, id: &str, max_cells: usize) -> GenBook {
        let n_sheets = self.rng.gen_range(1..=3);
        let mut names: Vec<String> = SHEET_NAMES.iter().map(|s| s.to_string()).collect();
        names.shuffle(&mut self.rng);
        names.truncate(n_sheets);
        let mut sheets: Vec<GenSheet> = names
            .iter()
            .map(|n| GenSheet {
                name: n.clone(),
                protection: self.rng.gen_bool(0.5),
                cells: BTreeMap::new(),
            })
            .collect();
        let budget = max_cells / n_sheets;
        for sheet in &mut sheets {
            let mut cells: BTreeMap<(u32, u32), (GenCell, bool)> = BTreeMap::new();
            for _ in 0..self.rng.gen_range(0..=3) {
                self.place_block(&names, &mut cells);
            }
            let scatter = self.rng.gen_range(5..60);
            for _ in 0..scatter {
                let at = (self.rng.gen_range(0..GRID_ROWS), self.rng.gen_range(0..GRID_COLS));
                let cell = self.gen_cell(&names, at);
                let locked = self.rng.gen_bool(0.8);
                cells.insert(at, (cell, locked));
            }
            while cells.len() > budget {
                let key = *cells.keys().nth(self.rng.gen_range(0..cells.len())).unwrap();
                cells.remove(&key);
            }
            sheet.cells = cells;
        }
        GenBook {
            id: id.to_string(),
            sheets,
        }
    }

    fn gen_cell(&mut self, sheets: &[String], at: (u32, u32)) -> GenCell {
        match self.rng.gen_range(0..20) {
            0..=4 => GenCell::Number(self.rng.gen_range(-50..500) as f64 / 4.0),
            5..=9 => GenCell::Text(TEXT_VALUES.choose(&mut self.rng).unwrap()),
            10 => GenCell::Unsupported(UNSUPPORTED.choose(&mut self.rng).unwrap()),
            11 => GenCell::Blank,
            _ => GenCell::Formula(self.gen_formula(sheets, Some((at.1, at.0)))),
        }
    }

    /// Copies one template formula along a row or column, altering a few
    /// copies.
    fn place_block(&mut self, sheets: &[String], cells: &mut BTreeMap<(u32, u32), (GenCell, bool)>) {
        let r0 = self.rng.gen_range(2..GRID_ROWS - 2);
        let c0 = self.rng.gen_range(2..GRID_COLS - 2);
        let template = self.gen_formula(sheets, Some((c0, r0)));
        let horizontal = self.rng.gen_bool(0.5);
        let len = self.rng.gen_range(2..=6);
        for k in 0..len {
            let (dr, dc) = if horizontal { (0, k) } else { (k, 0) };
            let (row, col) = (r0 + dr, c0 + dc);
            if row >= GRID_ROWS || col >= GRID_COLS {
                break;
            }
            let mut f = template.shifted(dr, dc);
            if self.rng.gen_bool(0.2) {
                let i = self.rng.gen_range(0..f.terms.len());
                f.terms[i] = self.gen_term(sheets, Some((col, row)));
            }
            let locked = self.rng.gen_bool(0.85);
            cells.insert((row, col), (GenCell::Formula(f), locked));
        }
    }
}

/// Comparable shape of a finding: anchor cell and sorted related cells.
pub type Shape = (CellAddress, Vec<CellAddress>);

pub fn shapes(findings: &[Finding]) -> Vec<Shape> {
    let mut out: Vec<Shape> = findings
        .iter()
        .map(|f| {
            let mut related = f.related_cells.clone();
            related.sort();
            (f.cell().expect("cell-anchored finding"), related)
        })
        .collect();
    out.sort();
    out
}

fn sorted(mut v: Vec<Shape>) -> Vec<Shape> {
    for s in &mut v {
        s.1.sort();
    }
    v.sort();
    v
}

pub fn oracle_constants(book: &GenBook, min_uses: usize, ignore: &[String], text: bool) -> Vec<Shape> {
    let ignored_number = |v: f64| {
        ignore.iter().any(|s| {
            let s = s.trim();
            s == canon(v) || s.parse::<f64>().map(|p| canon(p) == canon(v)).unwrap_or(false)
        })
    };
    let mut uses: BTreeMap<(bool, String), BTreeSet<CellAddress>> = BTreeMap::new();
    for (at, f) in book.formulas() {
        for t in &f.terms {
            match t {
                Term::Num { value, negative, .. } => {
                    let v = if *negative { -value } else { *value };
                    if !ignored_number(v) {
                        uses.entry((false, canon(v))).or_default().insert(at);
                    }
                }
                Term::Text(s) if text && !ignore.iter().any(|i| i == s) => {
                    uses.entry((true, s.to_string())).or_default().insert(at);
                }
                _ => {}
            }
        }
    }
    sorted(
        uses.into_values()
            .filter(|cells| cells.len() >= min_uses)
            .map(|cells| {
                let cells: Vec<CellAddress> = cells.into_iter().collect();
                (cells[0], cells)
            })
            .collect(),
    )
}

pub fn oracle_protection(book: &GenBook, require_sheet_protection: bool) -> Vec<Shape> {
    let mut out = Vec::new();
    for (si, s) in book.sheets.iter().enumerate() {
        for (&(row, col), (cell, locked)) in &s.cells {
            let is_formula = matches!(cell, GenCell::Formula(_) | GenCell::Unsupported(_));
            let protected = match (locked, s.protection, require_sheet_protection) {
                (false, _, _) => false,
                (true, true, _) => true,
                (true, false, true) => false,
                (true, false, false) => true,
            };
            if is_formula && !protected {
                out.push((CellAddress::new(si, col, row), vec![]));
            }
        }
    }
    sorted(out)
}

pub fn oracle_direction(book: &GenBook, cross_sheet: bool) -> Vec<Shape> {
    let mut out = Vec::new();
    for (host, f) in book.formulas() {
        let mut bad = BTreeSet::new();
        for t in &f.terms {
            let (sheet, col, row) = match t {
                Term::Ref(r) => (&r.sheet, r.col, r.row),
                Term::Range(a, b) => (&a.sheet, a.col.max(b.col), a.row.max(b.row)),
                _ => continue,
            };
            let target = match sheet {
                None => host.sheet,
                Some(name) => match book.sheet_index(name) {
                    Some(i) => i,
                    None => continue,
                },
            };
            if target != host.sheet && !cross_sheet {
                continue;
            }
            if col > host.column || row > host.row {
                bad.insert(CellAddress::new(target, col, row));
            }
        }
        if !bad.is_empty() {
            out.push((host, bad.into_iter().collect()));
        }
    }
    sorted(out)
}

pub fn oracle_blank(book: &GenBook, all_whitespace: bool) -> Vec<Shape> {
    const WHITESPACE: &[char] = &[' ', '\t', '\n', '\r', '\u{a0}', '\u{3000}', '\u{2003}', '\u{b}', '\u{c}'];
    let mut out = Vec::new();
    for (si, s) in book.sheets.iter().enumerate() {
        for (&(row, col), (cell, _)) in &s.cells {
            if let GenCell::Text(t) = cell {
                let ok = !t.is_empty() && t.chars().all(|c| c == ' ' || (all_whitespace && WHITESPACE.contains(&c)));
                if ok {
                    out.push((CellAddress::new(si, col, row), vec![]));
                }
            }
        }
    }
    sorted(out)
}

fn ref_key(r: &GenRef, host: CellAddress) -> String {
    let row = if r.row_abs { format!("R{}", r.row) } else { format!("r{}", r.row as i64 - host.row as i64) };
    let col = if r.col_abs { format!("C{}", r.col) } else { format!("c{}", r.col as i64 - host.column as i64) };
    format!("{row}{col}")
}

/// Position-independent rendering of a generated formula.
pub fn relative_key(f: &GenFormula, host: CellAddress) -> String {
    let term = |t: &Term| match t {
        Term::Ref(r) => format!("{:?}@{}", r.sheet, ref_key(r, host)),
        Term::Range(a, b) => {
            // A range is the product of two unordered bound pairs.
            let pair = |x: String, y: String| if x <= y { format!("{x},{y}") } else { format!("{y},{x}") };
            let row = |r: &GenRef| if r.row_abs { format!("R{}", r.row) } else { format!("r{}", r.row as i64 - host.row as i64) };
            let col = |r: &GenRef| if r.col_abs { format!("C{}", r.col) } else { format!("c{}", r.col as i64 - host.column as i64) };
            format!("{:?}@[{}][{}]", a.sheet, pair(row(a), row(b)), pair(col(a), col(b)))
        }
        Term::Num { value, negative, .. } => format!("{}{}", if *negative { "-" } else { "" }, canon(*value)),
        Term::Text(s) => format!("{s:?}"),
    };
    let mut key = format!("{:?}|{}|{}", f.wrap, f.paren, term(&f.terms[0]));
    for (op, t) in f.ops.iter().zip(&f.terms[1..]) {
        key.push_str(op);
        key.push_str(&term(t));
    }
    key
}

pub fn oracle_consistency(book: &GenBook, min_run: usize) -> Vec<Shape> {
    let keys: BTreeMap<CellAddress, String> = book.formulas().map(|(a, f)| (a, relative_key(f, a))).collect();
    let mut out = Vec::new();
    for (si, s) in book.sheets.iter().enumerate() {
        let _ = s;
        for horizontal in [true, false] {
            for line in 0..GRID_ROWS.max(GRID_COLS) + 1 {
                let mut run: Vec<CellAddress> = Vec::new();
                for pos in 0..=GRID_ROWS.max(GRID_COLS) + 1 {
                    let at = if horizontal { CellAddress::new(si, pos, line) } else { CellAddress::new(si, line, pos) };
                    if keys.contains_key(&at) {
                        run.push(at);
                        continue;
                    }
                    if run.len() >= min_run {
                        let forms: Vec<&String> = run.iter().map(|a| &keys[a]).collect();
                        let majority = forms
                            .iter()
                            .find(|f| 2 * forms.iter().filter(|g| g == f).count() > forms.len())
                            .copied();
                        let baseline = majority.unwrap_or(forms[0]);
                        for (a, f) in run.iter().zip(&forms) {
                            if *f != baseline {
                                out.push((*a, run.clone()));
                            }
                        }
                    }
                    run.clear();
                }
            }
        }
    }
    sorted(out)
}

/// A large synthetic workbook: `rows` rows, each with `value_cols` input
/// values followed by `formula_cols` formulas.
pub fn large_book(rows: u32, value_cols: u32, formula_cols: u32) -> GenBook {
    let mut cells = BTreeMap::new();
    for r in 1..=rows {
        for c in 0..value_cols {
            cells.insert((r, c), (GenCell::Number((r * 7 + c) as f64), true));
        }
        for k in 0..formula_cols {
            let f = GenFormula {
                terms: vec![
                    Term::Ref(GenRef { sheet: None, col: k, row: r, col_abs: false, row_abs: false }),
                    Term::Ref(GenRef { sheet: None, col: value_cols + k, row: r - 1, col_abs: false, row_abs: false }),
                    Term::Num { text: "1.19", value: 1.19, negative: false },
                ],
                ops: vec!["+", "*"],
                wrap: None,
                paren: false,
            };
            cells.insert((r, value_cols + k), (GenCell::Formula(f), true));
        }
    }
    GenBook {
        id: "large".into(),
        sheets: vec![GenSheet {
            name: "Data".into(),
            protection: true,
            cells,
        }],
    }
}

/// Column B copies column A; `noisy` books hard-code a rate in every
/// formula and `poor` books contain one blank-only cell.
pub fn planted_book(id: &str, noisy: bool, poor: bool) -> Workbook {
    let mut cells = Map::new();
    for r in 1..=5 {
        cells.insert(format!("A{r}"), json!({ "value": r * 10 }));
        let f = if noisy { format!("=A{r}*1.07") } else { format!("=A{r}") };
        cells.insert(format!("B{r}"), json!({ "formula": f }));
    }
    if poor {
        cells.insert("D8".into(), json!({ "value": "  " }));
    }
    let doc = json!({ "id": id, "sheets": [{ "name": "Data", "protection_enabled": true, "cells": cells }] });
    from_fixture_str(&doc.to_string(), id).unwrap()
}

/// Ten good and ten poor workbooks with three experts each; the third
/// expert dissents on every third workbook. Only poor books contain a
/// blank-only cell; half of each class carries an unrelated constant.
pub fn planted_corpus() -> (Vec<Workbook>, Vec<ExpertRating>) {
    let mut books = Vec::new();
    let mut ratings = Vec::new();
    for i in 0..20 {
        let poor = i >= 10;
        let id = format!("wb-{i:02}");
        books.push(planted_book(&id, i % 2 == 0, poor));
        let (majority, minority) = if poor { (Rating::Poor, Rating::Good) } else { (Rating::Good, Rating::Poor) };
        ratings.push(ExpertRating::new(&id, "ada", majority));
        ratings.push(ExpertRating::new(&id, "bo", majority));
        ratings.push(ExpertRating::new(&id, "cy", if i % 3 == 0 { minority } else { majority }));
    }
    (books, ratings)
}
