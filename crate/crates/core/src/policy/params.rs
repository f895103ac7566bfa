use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamType {
    Int,
    Decimal,
    Bool,
    String,
    StringList,
}

impl ParamType {
    pub fn accepts(self, value: &Value) -> bool {
        match self {
            ParamType::Int => value.as_i64().is_some(),
            ParamType::Decimal => value.is_number(),
            ParamType::Bool => value.is_boolean(),
            ParamType::String => value.is_string(),
            ParamType::StringList => value.as_array().is_some_and(|items| items.iter().all(Value::is_string)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ParamType::Int => "int",
            ParamType::Decimal => "decimal",
            ParamType::Bool => "bool",
            ParamType::String => "string",
            ParamType::StringList => "string-list",
        }
    }
}

/// One customizable parameter of a checker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: ParamType,
    pub default: Value,
    pub description: String,
    /// Inclusive lower bound for numeric parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimum: Option<f64>,
}

impl ParamSpec {
    pub fn new(name: &str, kind: ParamType, default: Value, description: &str) -> Self {
        Self {
            name: name.to_string(),
            kind,
            default,
            description: description.to_string(),
            minimum: None,
        }
    }

    pub fn at_least(mut self, minimum: f64) -> Self {
        self.minimum = Some(minimum);
        self
    }
}

/// What a checker tells the registry about itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckerDescriptor {
    pub id: String,
    pub display_name: String,
    pub summary: String,
    pub param_schema: Vec<ParamSpec>,
}

impl CheckerDescriptor {
    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.param_schema.iter().find(|p| p.name == name)
    }

    /// Parameters with every default filled in.
    pub fn defaults(&self) -> Params {
        Params(self.param_schema.iter().map(|p| (p.name.clone(), p.default.clone())).collect())
    }

    /// Defaults overlaid with the configured values.
    pub fn resolve(&self, configured: &BTreeMap<String, Value>) -> Params {
        let mut params = self.defaults();
        for (k, v) in configured {
            params.0.insert(k.clone(), v.clone());
        }
        params
    }
}

/// Resolved parameter values handed to a checker. Accessors fall back to a
/// neutral value only when the scenario was not validated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params(pub BTreeMap<String, Value>);

impl Params {
    pub fn int(&self, name: &str) -> i64 {
        self.0.get(name).and_then(Value::as_i64).unwrap_or_default()
    }

    pub fn decimal(&self, name: &str) -> f64 {
        self.0.get(name).and_then(Value::as_f64).unwrap_or_default()
    }

    pub fn bool(&self, name: &str) -> bool {
        self.0.get(name).and_then(Value::as_bool).unwrap_or_default()
    }

    pub fn string(&self, name: &str) -> String {
        self.0.get(name).and_then(Value::as_str).unwrap_or_default().to_string()
    }

    pub fn string_list(&self, name: &str) -> Vec<String> {
        self.0
            .get(name)
            .and_then(Value::as_array)
            .map(|items| items.iter().filter_map(|v| v.as_str().map(str::to_string)).collect())
            .unwrap_or_default()
    }

    pub fn set(&mut self, name: &str, value: Value) -> &mut Self {
        self.0.insert(name.to_string(), value);
        self
    }
}
