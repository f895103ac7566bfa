//! Command-line front end.
//!
//! Exit codes are part of the contract: `0` the analysis ran and reported
//! nothing, `1` it reported findings, `2` usage, input or validation error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::evaluation::{evaluate_rules, render_text as render_evaluation, EvaluationResult, ExpertRating};
use crate::model::load_workbook;
use crate::policy::{AnalysisRun, Registry, Scenario, Severity};
use crate::report::{serialize_report, CellRange, FilterSpec, GroupKey, OutputFormat, Report, SCHEMA_VERSION};

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "workbench", version, about = "Check spreadsheets against configurable practice policies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario over workbooks and write a findings report.
    Analyze(AnalyzeArgs),
    /// Score rules against expert ratings using stored runs or reports.
    Eval(EvalArgs),
    /// List the available checkers and their parameters as JSON.
    Checkers,
    /// Serve the HTTP API over a workspace directory.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Scenario JSON file.
    pub scenario: PathBuf,
    /// Workbooks (.xlsx or fixture .json).
    #[arg(required = true)]
    pub workbooks: Vec<PathBuf>,
    #[arg(long, default_value = "json")]
    pub format: OutputFormat,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "by_checker")]
    pub group: GroupKey,
    /// `key=value[,value...]` with key one of checker, workbook, severity,
    /// sheet (0-based index) or range (`A1:C10`). Repeatable.
    #[arg(long = "filter", value_name = "KEY=VALUES")]
    pub filters: Vec<String>,
    /// Ratings file; embeds a rule evaluation into the report.
    #[arg(long)]
    pub ratings: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Report or run JSON files.
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
    #[arg(long)]
    pub ratings: PathBuf,
    #[arg(long, default_value = "text")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "WORKBENCH_WORKSPACE", default_value = "workspace")]
    pub workspace: PathBuf,
    #[arg(long, env = "WORKBENCH_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Largest accepted upload in bytes.
    #[arg(long, env = "WORKBENCH_MAX_UPLOAD", default_value_t = crate::service::DEFAULT_MAX_UPLOAD)]
    pub max_upload: usize,
}

/// JSON document printed by `eval --format json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationDocument {
    pub schema_version: u32,
    pub run_ids: Vec<String>,
    pub evaluation: EvaluationResult,
}

/// Parses `--filter` arguments into a filter.
pub fn parse_filters(items: &[String]) -> Result<FilterSpec, String> {
    let mut spec = FilterSpec::default();
    for item in items {
        let (key, values) = item
            .split_once('=')
            .ok_or_else(|| format!("filter {item:?} is not of the form key=value"))?;
        let values = values.split(',').map(str::trim).filter(|v| !v.is_empty());
        for v in values {
            spec = match key.trim() {
                "checker" => spec.checker(v),
                "workbook" => spec.workbook(v),
                "severity" => spec.severity(v.parse::<Severity>()?),
                "sheet" => spec.sheet(v.parse().map_err(|_| format!("sheet filter {v:?} is not an index"))?),
                "range" => spec.range(v.parse::<CellRange>().map_err(|e| e.to_string())?),
                other => return Err(format!("unknown filter key {other:?}")),
            };
        }
    }
    Ok(spec)
}

/// Reads a run from either a report or a bare run document.
pub fn read_run(text: &str) -> Result<AnalysisRun, String> {
    if let Ok(report) = Report::from_json_str(text) {
        return Ok(report.to_run());
    }
    serde_json::from_str(text).map_err(|e| format!("neither a report nor a run: {e}"))
}

fn read_file(path: &PathBuf, what: &str) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {what} {}: {e}", path.display()))
}

fn read_ratings(path: &PathBuf) -> Result<Vec<ExpertRating>, String> {
    ExpertRating::list_from_json_str(&read_file(path, "ratings")?)
        .map_err(|e| format!("invalid ratings file {}: {e}", path.display()))
}

fn analyze(args: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<i32, String> {
    let scenario = Scenario::load(&args.scenario).map_err(|e| format!("{}: {e}", args.scenario.display()))?;
    let registry = Registry::builtin();
    let issues = registry.validate_scenario(&scenario);
    if !issues.is_empty() {
        let lines: Vec<String> = issues.iter().map(|i| format!("  {}", i.message)).collect();
        return Err(format!("scenario {} is invalid:\n{}", args.scenario.display(), lines.join("\n")));
    }
    let filter = parse_filters(&args.filters)?;
    let mut books = Vec::with_capacity(args.workbooks.len());
    for path in &args.workbooks {
        books.push(load_workbook(path, None).map_err(|e| format!("{}: {e}", path.display()))?);
    }
    let run = registry.run_scenario(&scenario, &books).map_err(|e| e.to_string())?;
    let mut report = Report::build(&run, &filter, args.group);
    if let Some(path) = &args.ratings {
        let evaluation = evaluate_rules(std::slice::from_ref(&run), &read_ratings(path)?).map_err(|e| e.to_string())?;
        report = report.with_evaluation(evaluation);
    }
    write_output(args.out.as_ref(), stdout, |w| serialize_report(&report, args.format, w))?;
    Ok(if report.findings.is_empty() { EXIT_CLEAN } else { EXIT_FINDINGS })
}

fn eval(args: &EvalArgs, stdout: &mut dyn Write) -> Result<i32, String> {
    let mut runs = Vec::with_capacity(args.runs.len());
    for path in &args.runs {
        runs.push(read_run(&read_file(path, "run")?).map_err(|e| format!("{}: {e}", path.display()))?);
    }
    let ratings = read_ratings(&args.ratings)?;
    let evaluation = evaluate_rules(&runs, &ratings).map_err(|e| e.to_string())?;
    let text = match args.format {
        OutputFormat::Text => render_evaluation(&evaluation),
        OutputFormat::Json => {
            let doc = EvaluationDocument {
                schema_version: SCHEMA_VERSION,
                run_ids: runs.iter().map(|r| r.run_id.clone()).collect(),
                evaluation,
            };
            serde_json::to_string_pretty(&doc).expect("evaluation serializes") + "\n"
        }
    };
    write_output(None, stdout, |w| w.write_all(text.as_bytes()))?;
    Ok(EXIT_CLEAN)
}

fn write_output(
    out: Option<&PathBuf>,
    stdout: &mut dyn Write,
    write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), String> {
    match out {
        Some(path) => {
            let mut buf = Vec::new();
            write(&mut buf).map_err(|e| e.to_string())?;
            std::fs::write(path, buf).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => write(stdout).map_err(|e| format!("cannot write output: {e}")),
    }
}

fn serve(args: &ServeArgs) -> Result<i32, String> {
    let _ = tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .try_init();
    let config = crate::service::ServeConfig {
        workspace: args.workspace.clone(),
        host: args.host.clone(),
        port: args.port,
        max_upload: args.max_upload,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| format!("cannot start runtime: {e}"))?;
    runtime
        .block_on(crate::service::serve(config))
        .map_err(|e| format!("service failed: {e}"))?;
    Ok(EXIT_CLEAN)
}

/// Runs the command line with explicit streams and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                EXIT_ERROR
            } else {
                let _ = write!(stdout, "{rendered}");
                EXIT_CLEAN
            };
        }
    };
    let outcome = match &cli.command {
        Command::Analyze(args) => analyze(args, stdout),
        Command::Eval(args) => eval(args, stdout),
        Command::Checkers => {
            let list = serde_json::to_string_pretty(&Registry::builtin().list_checkers()).expect("serializes");
            writeln!(stdout, "{list}").map(|_| EXIT_CLEAN).map_err(|e| e.to_string())
        }
        Command::Serve(args) => serve(args),
    };
    match outcome {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(stderr, "error: {message}");
            EXIT_ERROR
        }
    }
}
