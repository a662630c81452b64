//! Flat `key = value` configuration files, with JSON objects accepted as an
//! equivalent spelling.
//!
//! Both forms are normalised to a JSON object and then deserialised into a
//! typed struct, so unknown keys are rejected by `deny_unknown_fields` on the
//! target type.

use serde::de::DeserializeOwned;
use serde_json::{Map, Number, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: duplicate key {key:?}")]
    Duplicate { line: usize, key: String },
    #[error("JSON config must be an object")]
    NotAnObject,
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn scalar(text: &str) -> Value {
    let t = text.trim();
    if let Some(s) = t.strip_prefix('"').and_then(|s| s.strip_suffix('"')) {
        return Value::String(s.to_string());
    }
    match t {
        "true" => return Value::Bool(true),
        "false" => return Value::Bool(false),
        _ => {}
    }
    if let Ok(i) = t.parse::<i64>() {
        return Value::Number(i.into());
    }
    if let Ok(x) = t.parse::<f64>() {
        if let Some(n) = Number::from_f64(x) {
            return Value::Number(n);
        }
    }
    Value::String(t.to_string())
}

/// Parse either form into a JSON object.
pub fn parse_config_map(text: &str) -> Result<Map<String, Value>, ConfigError> {
    if text.trim_start().starts_with('{') {
        return match serde_json::from_str::<Value>(text)? {
            Value::Object(map) => Ok(map),
            _ => Err(ConfigError::NotAnObject),
        };
    }
    let mut map = Map::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: raw.to_string(),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            });
        }
        if map.insert(key.to_string(), scalar(value)).is_some() {
            return Err(ConfigError::Duplicate {
                line: i + 1,
                key: key.to_string(),
            });
        }
    }
    Ok(map)
}

pub fn from_config_str<T: DeserializeOwned>(text: &str) -> Result<T, ConfigError> {
    let map = parse_config_map(text)?;
    Ok(serde_json::from_value(Value::Object(map))?)
}
