//! Office Open XML (`.xlsx`) ingestion.
//!
//! Only what the checkers need is read: sheet names and order, cell values,
//! stored formula text, the `locked` protection attribute of each cell's
//! style and the `<sheetProtection>` switch of each sheet. Shared formulas
//! are expanded to the text each cell would show.

use std::collections::HashMap;
use std::io::{Cursor, Read};

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use zip::ZipArchive;

use super::{parse_a1_address, Cell, CellAddress, CellContent, CellValue, ErrorCode, LoadError, Sheet, Workbook};
use crate::formula::shift_formula_text;

type Archive<'a> = ZipArchive<Cursor<&'a [u8]>>;

fn malformed(msg: impl Into<String>) -> LoadError {
    LoadError::MalformedWorkbook(msg.into())
}

fn xml_err(part: &str, e: impl std::fmt::Display) -> LoadError {
    malformed(format!("{part}: {e}"))
}

fn read_part(archive: &mut Archive<'_>, path: &str) -> Result<Option<String>, LoadError> {
    let mut file = match archive.by_name(path) {
        Ok(f) => f,
        Err(zip::result::ZipError::FileNotFound) => return Ok(None),
        Err(e) => return Err(xml_err(path, e)),
    };
    let mut s = String::new();
    file.read_to_string(&mut s).map_err(|e| xml_err(path, e))?;
    Ok(Some(s))
}

fn attr(e: &BytesStart<'_>, local: &[u8]) -> Result<Option<String>, LoadError> {
    for a in e.attributes() {
        let a = a.map_err(|err| malformed(format!("attribute: {err}")))?;
        if a.key.local_name().as_ref() == local {
            let v = a.unescape_value().map_err(|err| malformed(format!("attribute: {err}")))?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

fn truthy(v: Option<&str>) -> bool {
    matches!(v, Some("1") | Some("true"))
}

/// Reads a workbook from `.xlsx` bytes. `name` becomes the workbook id.
pub fn read_xlsx(bytes: &[u8], name: &str) -> Result<Workbook, LoadError> {
    let mut archive = ZipArchive::new(Cursor::new(bytes)).map_err(|e| malformed(format!("not a zip archive: {e}")))?;
    let workbook_xml =
        read_part(&mut archive, "xl/workbook.xml")?.ok_or_else(|| malformed("missing xl/workbook.xml"))?;
    let rels = match read_part(&mut archive, "xl/_rels/workbook.xml.rels")? {
        Some(text) => parse_rels(&text)?,
        None => HashMap::new(),
    };
    let shared = match read_part(&mut archive, "xl/sharedStrings.xml")? {
        Some(text) => parse_shared_strings(&text)?,
        None => Vec::new(),
    };
    let locked_by_style = match read_part(&mut archive, "xl/styles.xml")? {
        Some(text) => parse_styles(&text)?,
        None => Vec::new(),
    };

    let mut sheets = Vec::new();
    for (sheet_name, rel_id) in parse_sheet_list(&workbook_xml)? {
        let target = rels
            .get(&rel_id)
            .ok_or_else(|| malformed(format!("sheet {sheet_name:?}: unknown relationship {rel_id}")))?;
        let path = match target.strip_prefix('/') {
            Some(abs) => abs.to_string(),
            None => format!("xl/{target}"),
        };
        let xml = read_part(&mut archive, &path)?.ok_or_else(|| malformed(format!("missing part {path}")))?;
        let ctx = SheetContext {
            shared: &shared,
            locked_by_style: &locked_by_style,
        };
        sheets.push(parse_worksheet(&xml, sheet_name, &ctx).map_err(|e| match e {
            LoadError::MalformedWorkbook(m) => malformed(format!("{path}: {m}")),
            other => other,
        })?);
    }
    Workbook::new(name, format!("xlsx:{name}"), sheets)
}

fn parse_sheet_list(xml: &str) -> Result<Vec<(String, String)>, LoadError> {
    let mut reader = Reader::from_str(xml);
    let mut out = Vec::new();
    loop {
        match reader.read_event().map_err(|e| xml_err("xl/workbook.xml", e))? {
            Event::Start(e) | Event::Empty(e) if e.local_name().as_ref() == b"sheet" => {
                let name = attr(&e, b"name")?.ok_or_else(|| malformed("sheet without name"))?;
                let id = attr(&e, b"id")?.ok_or_else(|| malformed("sheet without r:id"))?;
                out.push((name, id));
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if out.is_empty() {
        return Err(malformed("workbook lists no sheets"));
    }
    Ok(out)
}

fn parse_rels(xml: &str) -> Result<HashMap<String, String>, LoadError> {
    let mut reader = Reader::from_str(xml);
    let mut out = HashMap::new();
    loop {
        match reader.read_event().map_err(|e| xml_err("workbook.xml.rels", e))? {
            Event::Start(e) | Event::Empty(e) if e.local_name().as_ref() == b"Relationship" => {
                if let (Some(id), Some(target)) = (attr(&e, b"Id")?, attr(&e, b"Target")?) {
                    out.insert(id, target);
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(out)
}

fn parse_shared_strings(xml: &str) -> Result<Vec<String>, LoadError> {
    let mut reader = Reader::from_str(xml);
    let mut out = Vec::new();
    let mut current: Option<String> = None;
    let mut in_t = false;
    let mut in_phonetic = false;
    loop {
        match reader.read_event().map_err(|e| xml_err("sharedStrings.xml", e))? {
            Event::Start(e) => match e.local_name().as_ref() {
                b"si" => current = Some(String::new()),
                b"t" => in_t = true,
                b"rPh" => in_phonetic = true,
                _ => {}
            },
            Event::Empty(e) if e.local_name().as_ref() == b"si" => out.push(String::new()),
            Event::End(e) => match e.local_name().as_ref() {
                b"si" => out.push(current.take().unwrap_or_default()),
                b"t" => in_t = false,
                b"rPh" => in_phonetic = false,
                _ => {}
            },
            Event::Text(t) if in_t && !in_phonetic => {
                if let Some(cur) = current.as_mut() {
                    cur.push_str(&t.unescape().map_err(|e| xml_err("sharedStrings.xml", e))?);
                }
            }
            Event::CData(t) if in_t && !in_phonetic => {
                if let Some(cur) = current.as_mut() {
                    cur.push_str(&String::from_utf8_lossy(&t));
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(out)
}

/// `locked` flag of every entry of `<cellXfs>`, by style index.
fn parse_styles(xml: &str) -> Result<Vec<bool>, LoadError> {
    let mut reader = Reader::from_str(xml);
    let mut out = Vec::new();
    let mut in_cell_xfs = false;
    let mut in_xf = false;
    loop {
        match reader.read_event().map_err(|e| xml_err("styles.xml", e))? {
            Event::Start(e) => match e.local_name().as_ref() {
                b"cellXfs" => in_cell_xfs = true,
                b"xf" if in_cell_xfs => {
                    out.push(true);
                    in_xf = true;
                }
                b"protection" if in_xf => {
                    if let Some(last) = out.last_mut() {
                        *last = !matches!(attr(&e, b"locked")?.as_deref(), Some("0") | Some("false"));
                    }
                }
                _ => {}
            },
            Event::Empty(e) => match e.local_name().as_ref() {
                b"xf" if in_cell_xfs => out.push(true),
                b"protection" if in_xf => {
                    if let Some(last) = out.last_mut() {
                        *last = !matches!(attr(&e, b"locked")?.as_deref(), Some("0") | Some("false"));
                    }
                }
                _ => {}
            },
            Event::End(e) => match e.local_name().as_ref() {
                b"cellXfs" => in_cell_xfs = false,
                b"xf" => in_xf = false,
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(out)
}

struct SheetContext<'a> {
    shared: &'a [String],
    locked_by_style: &'a [bool],
}

#[derive(Default)]
struct PendingCell {
    column: u32,
    row: u32,
    style: Option<usize>,
    kind: Option<String>,
    value_text: Option<String>,
    formula: Option<PendingFormula>,
}

#[derive(Default)]
struct PendingFormula {
    text: String,
    shared_index: Option<String>,
    is_shared: bool,
    is_master: bool,
}

#[derive(PartialEq)]
enum TextTarget {
    None,
    Value,
    Formula,
    Inline,
}

fn parse_worksheet(xml: &str, name: String, ctx: &SheetContext<'_>) -> Result<Sheet, LoadError> {
    let mut reader = Reader::from_str(xml);
    let mut sheet = Sheet::new(name);
    // shared formula index -> (master text, master column, master row)
    let mut masters: HashMap<String, (String, u32, u32)> = HashMap::new();
    let mut row: u32 = 0;
    let mut next_row: u32 = 0;
    let mut next_column: u32 = 0;
    let mut pending: Option<PendingCell> = None;
    let mut target = TextTarget::None;

    loop {
        let event = reader.read_event().map_err(|e| malformed(e.to_string()))?;
        let (e, empty) = match event {
            Event::Start(e) => (e, false),
            Event::Empty(e) => (e, true),
            Event::Text(t) => {
                if let Some(cell) = pending.as_mut() {
                    let text = t.unescape().map_err(|e| malformed(e.to_string()))?;
                    match target {
                        TextTarget::Value | TextTarget::Inline => {
                            cell.value_text.get_or_insert_with(String::new).push_str(&text)
                        }
                        TextTarget::Formula => {
                            if let Some(f) = cell.formula.as_mut() {
                                f.text.push_str(&text);
                            }
                        }
                        TextTarget::None => {}
                    }
                }
                continue;
            }
            Event::End(e) => {
                match e.local_name().as_ref() {
                    b"c" => {
                        if let Some(cell) = pending.take() {
                            finish_cell(&mut sheet, cell, ctx, &mut masters)?;
                        }
                    }
                    b"v" | b"f" | b"t" => target = TextTarget::None,
                    _ => {}
                }
                continue;
            }
            Event::Eof => break,
            _ => continue,
        };
        match e.local_name().as_ref() {
            b"sheetProtection" => sheet.protection_enabled = truthy(attr(&e, b"sheet")?.as_deref()),
            b"row" => {
                if let Some(r) = attr(&e, b"r")? {
                    let n: u32 = r.parse().map_err(|_| malformed(format!("bad row number {r:?}")))?;
                    if n == 0 {
                        return Err(malformed("row number 0"));
                    }
                    row = n - 1;
                } else {
                    row = next_row;
                }
                next_row = row + 1;
                next_column = 0;
            }
            b"c" => {
                let (column, r) = match attr(&e, b"r")? {
                    Some(text) => {
                        let a = parse_a1_address(&text).map_err(|err| malformed(err.to_string()))?;
                        (a.column, a.row)
                    }
                    None => (next_column, row),
                };
                next_column = column + 1;
                let style = match attr(&e, b"s")? {
                    Some(s) => Some(s.parse::<usize>().map_err(|_| malformed(format!("bad style index {s:?}")))?),
                    None => None,
                };
                let cell = PendingCell {
                    column,
                    row: r,
                    style,
                    kind: attr(&e, b"t")?,
                    ..PendingCell::default()
                };
                if empty {
                    finish_cell(&mut sheet, cell, ctx, &mut masters)?;
                } else {
                    pending = Some(cell);
                }
            }
            b"f" => {
                if let Some(cell) = pending.as_mut() {
                    let kind = attr(&e, b"t")?;
                    let is_shared = kind.as_deref() == Some("shared");
                    cell.formula = Some(PendingFormula {
                        text: String::new(),
                        shared_index: attr(&e, b"si")?,
                        is_shared,
                        is_master: is_shared && attr(&e, b"ref")?.is_some(),
                    });
                    if !empty {
                        target = TextTarget::Formula;
                    }
                }
            }
            b"v" if !empty => target = TextTarget::Value,
            b"t" if !empty && pending.is_some() => target = TextTarget::Inline,
            _ => {}
        }
    }
    Ok(sheet)
}

fn finish_cell(
    sheet: &mut Sheet,
    cell: PendingCell,
    ctx: &SheetContext<'_>,
    masters: &mut HashMap<String, (String, u32, u32)>,
) -> Result<(), LoadError> {
    let address = CellAddress::new(0, cell.column, cell.row);
    let locked = match cell.style {
        Some(i) => ctx.locked_by_style.get(i).copied().unwrap_or(true),
        None => ctx.locked_by_style.first().copied().unwrap_or(true),
    };
    let value = decode_value(cell.kind.as_deref(), cell.value_text, ctx.shared)?;
    let formula_text = match cell.formula {
        Some(f) if !f.text.trim().is_empty() => {
            if f.is_master {
                if let Some(si) = &f.shared_index {
                    masters.insert(si.clone(), (f.text.clone(), cell.column, cell.row));
                }
            }
            Some(format!("={}", f.text))
        }
        Some(f) if f.is_shared => {
            let si = f.shared_index.ok_or_else(|| malformed("shared formula without si"))?;
            let (text, mc, mr) = masters
                .get(&si)
                .ok_or_else(|| malformed(format!("shared formula {si} used before its definition")))?;
            let source = format!("={text}");
            let shifted = shift_formula_text(
                &source,
                i64::from(cell.row) - i64::from(*mr),
                i64::from(cell.column) - i64::from(*mc),
            )
            .unwrap_or(source);
            Some(shifted)
        }
        _ => None,
    };
    let content = match formula_text {
        Some(source) => CellContent::Formula { source, cached: value },
        None => CellContent::Value(value),
    };
    sheet.insert(Cell {
        address,
        content,
        locked,
    });
    Ok(())
}

fn decode_value(kind: Option<&str>, text: Option<String>, shared: &[String]) -> Result<CellValue, LoadError> {
    let Some(text) = text else {
        return Ok(CellValue::Empty);
    };
    Ok(match kind {
        Some("s") => {
            let idx: usize = text.trim().parse().map_err(|_| malformed(format!("bad shared string index {text:?}")))?;
            CellValue::Text(
                shared
                    .get(idx)
                    .cloned()
                    .ok_or_else(|| malformed(format!("shared string {idx} out of range")))?,
            )
        }
        Some("str") | Some("inlineStr") | Some("d") => CellValue::Text(text),
        Some("b") => CellValue::Boolean(text.trim() == "1" || text.trim().eq_ignore_ascii_case("true")),
        Some("e") => CellValue::Error(text.parse::<ErrorCode>().unwrap_or(ErrorCode::Value)),
        _ => {
            if text.trim().is_empty() {
                CellValue::Empty
            } else {
                let n: f64 = text.trim().parse().map_err(|_| malformed(format!("bad number {text:?}")))?;
                CellValue::Number(n)
            }
        }
    })
}
