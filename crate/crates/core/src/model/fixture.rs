//! Plain-text (JSON) workbook fixtures.
//!
//! ```json
//! {
//!   "id": "budget",
//!   "sheets": [
//!     {
//!       "name": "Sheet1",
//!       "protection_enabled": true,
//!       "cells": {
//!         "A1": { "value": 5 },
//!         "A2": { "value": "label" },
//!         "A3": { "value": { "error": "#N/A" } },
//!         "B2": { "formula": "=A1+1", "cached": 6, "locked": false }
//!       }
//!     }
//!   ]
//! }
//! ```
//!
//! `id` defaults to the file name. `protection_enabled` defaults to false
//! and `locked` to true. A cell with neither `value` nor `formula` is empty;
//! it is only kept when it is unlocked.

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value as Json;
use std::collections::BTreeMap;

use super::{parse_a1_address, Cell, CellAddress, CellContent, CellValue, ErrorCode, LoadError, Sheet, Workbook};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureBook {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    sheets: Vec<FixtureSheet>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureSheet {
    name: String,
    #[serde(default)]
    protection_enabled: bool,
    #[serde(default, serialize_with = "ordered_cells")]
    cells: BTreeMap<String, FixtureCell>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureCell {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<Json>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    formula: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cached: Option<Json>,
    #[serde(default = "default_locked", skip_serializing_if = "is_true")]
    locked: bool,
}

fn default_locked() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

/// Writes cells in row-major order rather than lexicographic key order.
fn ordered_cells<S: Serializer>(cells: &BTreeMap<String, FixtureCell>, s: S) -> Result<S::Ok, S::Error> {
    let mut entries: Vec<_> = cells.iter().collect();
    entries.sort_by_key(|(k, _)| parse_a1_address(k).map(|a| (a.row, a.column)).unwrap_or((u32::MAX, u32::MAX)));
    let mut map = s.serialize_map(Some(entries.len()))?;
    for (k, v) in entries {
        map.serialize_entry(k, v)?;
    }
    map.end()
}

fn malformed(msg: String) -> LoadError {
    LoadError::MalformedWorkbook(msg)
}

fn value_from_json(json: &Json, at: &str) -> Result<CellValue, LoadError> {
    Ok(match json {
        Json::Null => CellValue::Empty,
        Json::Bool(b) => CellValue::Boolean(*b),
        Json::Number(n) => CellValue::Number(
            n.as_f64()
                .filter(|v| v.is_finite())
                .ok_or_else(|| malformed(format!("{at}: number out of range")))?,
        ),
        Json::String(s) => CellValue::Text(s.clone()),
        Json::Object(map) if map.len() == 1 && map.contains_key("error") => {
            let code = map["error"]
                .as_str()
                .ok_or_else(|| malformed(format!("{at}: error code must be a string")))?;
            CellValue::Error(code.parse::<ErrorCode>().map_err(|e| malformed(format!("{at}: {e}")))?)
        }
        other => return Err(malformed(format!("{at}: unsupported cell value {other}"))),
    })
}

fn value_to_json(value: &CellValue) -> Option<Json> {
    match value {
        CellValue::Empty => None,
        CellValue::Boolean(b) => Some(Json::Bool(*b)),
        CellValue::Number(n) => serde_json::Number::from_f64(*n).map(Json::Number),
        CellValue::Text(s) => Some(Json::String(s.clone())),
        CellValue::Error(e) => Some(serde_json::json!({ "error": e.as_str() })),
    }
}

/// Parses fixture text. `name` becomes the workbook id when the fixture
/// does not carry one.
pub fn from_fixture_str(text: &str, name: &str) -> Result<Workbook, LoadError> {
    let book: FixtureBook =
        serde_json::from_str(text).map_err(|e| malformed(format!("fixture {name}: {e}")))?;
    let mut sheets = Vec::with_capacity(book.sheets.len());
    for fs in book.sheets {
        let mut sheet = Sheet::new(fs.name.clone()).protected(fs.protection_enabled);
        for (key, fc) in fs.cells {
            let at = format!("{}!{}", fs.name, key);
            let parsed = parse_a1_address(&key).map_err(|e| malformed(format!("{at}: {e}")))?;
            if parsed.column_absolute || parsed.row_absolute {
                return Err(malformed(format!("{at}: cell keys must not contain '$'")));
            }
            let address = CellAddress::new(0, parsed.column, parsed.row);
            let content = match (fc.formula, fc.value) {
                (Some(_), Some(_)) => return Err(malformed(format!("{at}: both value and formula given"))),
                (Some(source), None) => {
                    if !source.trim_start().starts_with('=') {
                        return Err(malformed(format!("{at}: formula must start with '='")));
                    }
                    let cached = match &fc.cached {
                        Some(j) => value_from_json(j, &at)?,
                        None => CellValue::Empty,
                    };
                    CellContent::Formula { source, cached }
                }
                (None, value) => {
                    if fc.cached.is_some() {
                        return Err(malformed(format!("{at}: cached value without formula")));
                    }
                    CellContent::Value(match value {
                        Some(j) => value_from_json(&j, &at)?,
                        None => CellValue::Empty,
                    })
                }
            };
            sheet.insert(Cell {
                address,
                content,
                locked: fc.locked,
            });
        }
        sheets.push(sheet);
    }
    let id = book.id.unwrap_or_else(|| name.to_string());
    Workbook::new(id, format!("fixture:{name}"), sheets)
}

/// Renders a workbook as fixture JSON. Reloading the output yields a
/// workbook with equal id and sheets.
pub fn to_fixture_string(book: &Workbook) -> String {
    let sheets = book
        .sheets()
        .iter()
        .map(|sheet| FixtureSheet {
            name: sheet.name.clone(),
            protection_enabled: sheet.protection_enabled,
            cells: sheet
                .cells()
                .map(|cell| {
                    let fc = match &cell.content {
                        CellContent::Value(v) => FixtureCell {
                            value: value_to_json(v),
                            formula: None,
                            cached: None,
                            locked: cell.locked,
                        },
                        CellContent::Formula { source, cached } => FixtureCell {
                            value: None,
                            formula: Some(source.clone()),
                            cached: value_to_json(cached),
                            locked: cell.locked,
                        },
                    };
                    (cell.address.a1(), fc)
                })
                .collect(),
        })
        .collect();
    let doc = FixtureBook {
        id: Some(book.id.clone()),
        sheets,
    };
    serde_json::to_string_pretty(&doc).expect("fixture serialization cannot fail")
}
