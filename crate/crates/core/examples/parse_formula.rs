//! Parse formulas, look at their structure and normalize them.
//!
//!     cargo run --example parse_formula -- "=SUM(B2:B9)*1.19"

use sheet_workbench::formula::{
    extract_constants, extract_references, normalize_r1c1, parse_formula, print_formula, shift_formula_text,
};
use sheet_workbench::model::CellAddress;

fn main() {
    let mut inputs: Vec<String> = std::env::args().skip(1).collect();
    if inputs.is_empty() {
        inputs = [
            "=B2*(1+C2)",
            "=-2^2 + 5%",
            "=SUM('Q1 Data'!B2:B9, $D$1) * 1.19",
            "=IF(A1>=100,\"big\",A1&\" units\")",
            "=Rate*2",
            "={1,2,3}",
            "=SUM(1,",
        ]
        .map(String::from)
        .to_vec();
    }
    let host = CellAddress::new(0, 3, 4); // D5
    for text in &inputs {
        println!("{text}");
        match parse_formula(text) {
            Ok(ast) => {
                println!("  printed     {}", print_formula(&ast));
                println!("  relative    {} (as if in D5)", normalize_r1c1(&ast, host));
                let refs: Vec<String> = extract_references(&ast)
                    .iter()
                    .map(|r| {
                        let (c, row) = r.far_corner();
                        format!("{}{}", r.sheet().map(|s| format!("{s}!")).unwrap_or_default(), CellAddress::new(0, c, row).a1())
                    })
                    .collect();
                println!("  references  {refs:?} (far corners)");
                println!("  constants   {:?}", extract_constants(&ast));
                if let Ok(copied) = shift_formula_text(text, 1, 0) {
                    println!("  copied down {copied}");
                }
            }
            Err(e) => println!("  not analyzable: {e}"),
        }
    }
}
