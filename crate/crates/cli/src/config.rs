//! JSON config files use the long flag names as keys; flags given on the
//! command line win over file values.

use std::fs;
use std::path::Path;

use clap::CommandFactory;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::Cli;

pub fn load(path: &Path, subcommand: &str) -> Result<Map<String, Value>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| format!("config {} is not valid JSON: {e}", path.display()))?;
    let Value::Object(map) = value else {
        return Err(format!("config {} must hold a JSON object", path.display()));
    };
    let known = known_keys(subcommand);
    if let Some(bad) = map.keys().find(|k| !known.contains(k)) {
        return Err(format!("unknown config key `{bad}` for `{subcommand}` (expected one of: {})", known.join(", ")));
    }
    Ok(map)
}

fn known_keys(subcommand: &str) -> Vec<String> {
    let cmd = Cli::command();
    let mut keys: Vec<String> = cmd
        .get_arguments()
        .chain(cmd.find_subcommand(subcommand).into_iter().flat_map(|s| s.get_arguments()))
        .filter_map(|a| a.get_long())
        .filter(|l| !matches!(*l, "config" | "help" | "version"))
        .map(str::to_string)
        .collect();
    keys.sort();
    keys.dedup();
    keys
}

/// Overlays the values set on the command line onto the file values.
pub fn merge<T: Serialize + DeserializeOwned>(cli: &T, file: &Map<String, Value>) -> Result<T, String> {
    let mut merged = file.clone();
    if let Value::Object(given) = serde_json::to_value(cli).map_err(|e| e.to_string())? {
        for (k, v) in given {
            // unset options and absent switches leave the file value alone
            if !(v.is_null() || v == Value::Bool(false)) {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| format!("invalid config value: {e}"))
}
