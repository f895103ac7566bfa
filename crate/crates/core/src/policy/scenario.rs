use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{Registry, Severity};

/// One configured checker inside a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckerConfig {
    #[serde(rename = "id")]
    pub checker_id: String,
    #[serde(default = "enabled_default")]
    pub enabled: bool,
    #[serde(default)]
    pub severity: Severity,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
}

fn enabled_default() -> bool {
    true
}

impl CheckerConfig {
    pub fn new(checker_id: &str) -> Self {
        Self {
            checker_id: checker_id.to_string(),
            enabled: true,
            severity: Severity::default(),
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.params.insert(name.to_string(), value.into());
        self
    }

    pub fn with_severity(mut self, severity: Severity) -> Self {
        self.severity = severity;
        self
    }

    pub fn disabled(mut self) -> Self {
        self.enabled = false;
        self
    }
}

/// A named policy: the checkers to run and how each is configured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub checkers: Vec<CheckerConfig>,
}

#[derive(Debug, Error)]
pub enum ScenarioFileError {
    #[error("cannot read scenario {path}: {source}")]
    Unreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid scenario document: {0}")]
    Syntax(#[from] serde_json::Error),
}

impl Scenario {
    pub fn new(name: &str, description: &str) -> Self {
        Self {
            name: name.to_string(),
            description: description.to_string(),
            checkers: Vec::new(),
        }
    }

    pub fn with_checker(mut self, config: CheckerConfig) -> Self {
        self.checkers.push(config);
        self
    }

    pub fn checker(&self, id: &str) -> Option<&CheckerConfig> {
        self.checkers.iter().find(|c| c.checker_id == id)
    }

    pub fn checker_mut(&mut self, id: &str) -> Option<&mut CheckerConfig> {
        self.checkers.iter_mut().find(|c| c.checker_id == id)
    }

    pub fn enabled_checkers(&self) -> impl Iterator<Item = &CheckerConfig> {
        self.checkers.iter().filter(|c| c.enabled)
    }

    pub fn from_json_str(text: &str) -> Result<Self, ScenarioFileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioFileError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioFileError::Unreadable {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    EmptyName,
    UnknownChecker,
    DuplicateChecker,
    UnknownParam,
    ParamTypeMismatch,
    ParamOutOfRange,
}

/// A problem found by [`validate_scenario`]. Issues are data, not errors:
/// the service returns them verbatim in its 400 bodies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub kind: IssueKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checker_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Checks a scenario against the registry. An empty list means valid.
pub fn validate_scenario(registry: &Registry, scenario: &Scenario) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    if scenario.name.trim().is_empty() {
        issues.push(ValidationIssue {
            kind: IssueKind::EmptyName,
            checker_id: None,
            param: None,
            message: "scenario name must not be empty".into(),
        });
    }
    let mut seen = HashSet::new();
    for config in &scenario.checkers {
        let id = &config.checker_id;
        if !seen.insert(id.as_str()) {
            issues.push(ValidationIssue {
                kind: IssueKind::DuplicateChecker,
                checker_id: Some(id.clone()),
                param: None,
                message: format!("checker {id:?} is configured more than once"),
            });
            continue;
        }
        let Some(descriptor) = registry.descriptor(id) else {
            issues.push(ValidationIssue {
                kind: IssueKind::UnknownChecker,
                checker_id: Some(id.clone()),
                param: None,
                message: format!("unknown checker {id:?}"),
            });
            continue;
        };
        for (name, value) in &config.params {
            let issue = |kind, message| ValidationIssue {
                kind,
                checker_id: Some(id.clone()),
                param: Some(name.clone()),
                message,
            };
            let Some(spec) = descriptor.param(name) else {
                issues.push(issue(IssueKind::UnknownParam, format!("{id}: unknown parameter {name:?}")));
                continue;
            };
            if !spec.kind.accepts(value) {
                issues.push(issue(
                    IssueKind::ParamTypeMismatch,
                    format!("{id}: parameter {name:?} expects {}, got {value}", spec.kind.name()),
                ));
                continue;
            }
            if let (Some(min), Some(v)) = (spec.minimum, value.as_f64()) {
                if v < min {
                    issues.push(issue(
                        IssueKind::ParamOutOfRange,
                        format!("{id}: parameter {name:?} must be at least {min}, got {value}"),
                    ));
                }
            }
        }
    }
    issues
}
