//! Load workbooks from `.xlsx` files and from the JSON fixture format.
//!
//! Without arguments a small `.xlsx` is generated first.
//!
//!     cargo run --example load_workbook -- path/to/book.xlsx

use rust_xlsxwriter::{Format, Workbook as XlsxWorkbook};
use sheet_workbench::model::fixture::to_fixture_string;
use sheet_workbench::model::{load_workbook, CellContent};

fn sample_xlsx(path: &std::path::Path) {
    let mut book = XlsxWorkbook::new();
    let sheet = book.add_worksheet();
    sheet.set_name("Costs").unwrap();
    sheet.write_string(0, 0, "Item").unwrap();
    sheet.write_string(0, 1, "Net").unwrap();
    sheet.write_string(0, 2, "Gross").unwrap();
    for r in 1..=3u32 {
        sheet.write_number(r, 1, f64::from(r) * 100.0).unwrap();
        sheet.write_formula(r, 2, format!("=B{}*1.19", r + 1).as_str()).unwrap();
    }
    sheet
        .write_formula_with_format(4, 2, "=SUM(C2:C4)", &Format::new().set_unlocked())
        .unwrap();
    sheet.protect();
    book.save(path).unwrap();
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let path = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            let p = dir.path().join("costs.xlsx");
            sample_xlsx(&p);
            p
        }
    };
    let book = match load_workbook(&path, None) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            std::process::exit(2);
        }
    };
    println!("{} ({}): {} cells, {} formulas", book.id, book.origin, book.cell_count(), book.formula_count());
    for sheet in book.sheets() {
        println!("sheet {:?}, protected: {}", sheet.name, sheet.protection_enabled);
        for cell in sheet.cells() {
            let shown = match &cell.content {
                CellContent::Formula { source, .. } => source.clone(),
                CellContent::Value(v) => format!("{v:?}"),
            };
            println!("  {:<5} {:<28} {}", cell.address.a1(), shown, if cell.locked { "" } else { "unlocked" });
        }
    }
    println!("\nas fixture JSON:\n{}", to_fixture_string(&book));
}
