//! A spreadsheet quality-assurance workbench.
//!
//! Workbooks ([`model`]) are checked against a [`policy::Scenario`] — a
//! named selection of configured rule checkers ([`rules`]). The resulting
//! [`policy::AnalysisRun`] is filtered, grouped and serialized by
//! [`report`], and [`evaluation`] correlates which rules fire with expert
//! ratings to find rules that separate good spreadsheets from poor ones.
//!
//! ```
//! use sheet_workbench::model::fixture::from_fixture_str;
//! use sheet_workbench::policy::{run_scenario, CheckerConfig, Scenario};
//!
//! let book = from_fixture_str(
//!     r#"{"sheets":[{"name":"Sheet1","cells":{"A1":{"value":" "},"B1":{"formula":"=C1"}}}]}"#,
//!     "demo",
//! )
//! .unwrap();
//! let scenario = Scenario::new("demo", "")
//!     .with_checker(CheckerConfig::new("blank-only-cells"))
//!     .with_checker(CheckerConfig::new("reference-direction"));
//! let run = run_scenario(&scenario, &[book]).unwrap();
//! assert_eq!(run.findings.len(), 2);
//! ```

pub mod cli;
pub mod evaluation;
pub mod formula;
pub mod model;
pub mod policy;
pub mod report;
pub mod rules;
pub mod service;
