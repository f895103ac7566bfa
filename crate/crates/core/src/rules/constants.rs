use std::collections::{BTreeMap, BTreeSet};

use serde_json::json;

use crate::formula::{canonical_number, extract_constants, extract_text_literals};
use crate::model::CellAddress;
use crate::policy::{CheckerDescriptor, Finding, Location, ParamSpec, ParamType, Params, ParsedWorkbook, RuleChecker};

use super::CONSTANTS_IN_FORMULAE as ID;

const EXPLANATION: &str = "A value typed into several formulas has to be found and changed in every one of them \
when it changes; missing a single occurrence silently produces wrong results.";

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsConfig {
    /// Distinct formula cells a constant must appear in to be reported.
    pub min_uses: usize,
    /// Constants never reported, compared by canonical rendering.
    pub ignore_values: Vec<String>,
    pub include_text_literals: bool,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self {
            min_uses: 2,
            ignore_values: Vec::new(),
            include_text_literals: false,
        }
    }
}

impl ConstantsConfig {
    pub fn from_params(params: &Params) -> Self {
        Self {
            min_uses: params.int("min_uses").max(1) as usize,
            ignore_values: params.string_list("ignore_values"),
            include_text_literals: params.bool("include_text_literals"),
        }
    }

    fn ignores_number(&self, n: f64) -> bool {
        let rendered = canonical_number(n);
        self.ignore_values.iter().any(|v| {
            let v = v.trim();
            v == rendered || v.parse::<f64>().is_ok_and(|p| canonical_number(p) == rendered)
        })
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord, Clone)]
enum Constant {
    Number(String),
    Text(String),
}

impl Constant {
    fn display(&self) -> String {
        match self {
            Constant::Number(n) => n.clone(),
            Constant::Text(s) => format!("{s:?}"),
        }
    }
}

/// Reports constants reused across formula cells, once per constant, at
/// its first occurrence.
pub fn check_constants_in_formulae(book: &ParsedWorkbook<'_>, config: &ConstantsConfig) -> Vec<Finding> {
    let mut uses: BTreeMap<Constant, Vec<CellAddress>> = BTreeMap::new();
    for (address, ast) in book.formulas() {
        let mut here = BTreeSet::new();
        for n in extract_constants(ast) {
            if !config.ignores_number(n) {
                here.insert(Constant::Number(canonical_number(n)));
            }
        }
        if config.include_text_literals {
            for s in extract_text_literals(ast) {
                if !config.ignore_values.contains(&s) {
                    here.insert(Constant::Text(s));
                }
            }
        }
        for c in here {
            uses.entry(c).or_default().push(address);
        }
    }
    let mut reported: Vec<(Constant, Vec<CellAddress>)> =
        uses.into_iter().filter(|(_, cells)| cells.len() >= config.min_uses).collect();
    reported.sort_by(|a, b| (a.1[0], &a.0).cmp(&(b.1[0], &b.0)));
    reported
        .into_iter()
        .map(|(constant, cells)| {
            let shown = constant.display();
            let labels: Vec<String> = cells.iter().map(|a| book.book.label(*a)).collect();
            Finding::new(
                ID,
                book.book,
                Location::Cell { address: cells[0] },
                format!("Constant {shown} is hardcoded in {} formulas: {}", cells.len(), labels.join(", ")),
                EXPLANATION,
                format!("Move {shown} into a dedicated, labelled input cell and reference that cell from each formula."),
                cells,
            )
        })
        .collect()
}

pub struct ConstantsInFormulae;

impl RuleChecker for ConstantsInFormulae {
    fn descriptor(&self) -> CheckerDescriptor {
        CheckerDescriptor {
            id: ID.into(),
            display_name: "Constants in formulae".into(),
            summary: "Hardcoded constants used in multiple formulae".into(),
            param_schema: vec![
                ParamSpec::new(
                    "min_uses",
                    ParamType::Int,
                    json!(2),
                    "Number of distinct formula cells a constant must occur in",
                )
                .at_least(1.0),
                ParamSpec::new("ignore_values", ParamType::StringList, json!([]), "Constants that are never reported"),
                ParamSpec::new(
                    "include_text_literals",
                    ParamType::Bool,
                    json!(false),
                    "Also report repeated string literals",
                ),
            ],
        }
    }

    fn check(&self, workbook: &ParsedWorkbook<'_>, params: &Params) -> Vec<Finding> {
        check_constants_in_formulae(workbook, &ConstantsConfig::from_params(params))
    }
}
