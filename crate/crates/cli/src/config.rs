//! Option layering: command-line flags over config-file values over defaults.
//!
//! The config file is TOML. Top-level keys apply to every command; a table
//! named after the command (`[predict]`, `[threshold_scan]`, ...) overrides
//! them for that command. Keys are the long flag names, with `-` or `_`.
//! The judge kind is spelled `judge_kind` in the file.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    table: Map<String, Value>,
}

fn normalize(map: Map<String, Value>) -> Map<String, Value> {
    map.into_iter()
        .map(|(k, v)| {
            let v = match v {
                Value::Object(inner) => Value::Object(normalize(inner)),
                other => other,
            };
            (k.replace('-', "_"), v)
        })
        .collect()
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))?;
        let value = serde_json::to_value(table)
            .map_err(|e| CliError::Config(format!("config file: {e}")))?;
        match value {
            Value::Object(map) => Ok(Self {
                table: normalize(map),
            }),
            _ => unreachable!("a TOML document is a table"),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Top-level values overlaid with those of `[section]`.
    pub fn values_for(&self, section: &str) -> Map<String, Value> {
        let mut out: Map<String, Value> = self
            .table
            .iter()
            .filter(|(_, v)| !v.is_object())
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        if let Some(Value::Object(sec)) = self.table.get(section) {
            out.extend(sec.clone());
        }
        out
    }

    pub fn log_level(&self) -> Option<String> {
        self.table
            .get("log_level")
            .and_then(Value::as_str)
            .map(str::to_string)
    }
}

/// Fills every option left unset on the command line from the file.
pub fn layered<T: Serialize + DeserializeOwned>(
    cli: &T,
    file: &FileConfig,
    section: &str,
) -> Result<T, CliError> {
    let Value::Object(flags) =
        serde_json::to_value(cli).map_err(|e| CliError::Config(e.to_string()))?
    else {
        unreachable!("option structs serialize as maps")
    };
    let mut merged = file.values_for(section);
    for (k, v) in flags {
        let unset = match &v {
            Value::Null => true,
            Value::Array(a) => a.is_empty(),
            _ => false,
        };
        if !unset {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Config(format!("config file [{section}]: {e}")))
}
