use std::path::Path;

use serde_json::{Map, Value};

use super::CliError;

/// Merges flag values over an optional JSON config file and records every
/// value actually used, so the resolved configuration can be logged.
pub struct Resolver {
    file: Map<String, Value>,
    pub resolved: Map<String, Value>,
}

fn as_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

impl Resolver {
    pub fn new(path: Option<&Path>) -> Result<Self, CliError> {
        let file = match path {
            None => Map::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", p.display())))?;
                match serde_json::from_str::<Value>(&text) {
                    Ok(Value::Object(m)) => m,
                    Ok(_) => return Err(CliError::Validation("config file must hold a JSON object".into())),
                    Err(e) => return Err(CliError::Validation(format!("config {}: {e}", p.display()))),
                }
            }
        };
        Ok(Self { file, resolved: Map::new() })
    }

    fn file_value(&self, key: &str) -> Option<&Value> {
        self.file.get(key).or_else(|| self.file.get(&key.replace('_', "-")))
    }

    /// Text value (numbers in the file are taken verbatim).
    pub fn text(&mut self, key: &str, flag: Option<String>, default: Option<&str>) -> Result<Option<String>, CliError> {
        let v =
            match flag {
                Some(v) => Some(v),
                None => match self.file_value(key) {
                    Some(v) => Some(as_text(v).ok_or_else(|| {
                        CliError::Validation(format!("config key {key}: expected a string or number"))
                    })?),
                    None => default.map(str::to_string),
                },
            };
        if let Some(s) = &v {
            self.resolved.insert(key.into(), Value::String(s.clone()));
        }
        Ok(v)
    }

    pub fn required_text(&mut self, key: &str, flag: Option<String>) -> Result<String, CliError> {
        self.text(key, flag, None)?
            .ok_or_else(|| CliError::Validation(format!("missing required value --{}", key.replace('_', "-"))))
    }

    pub fn f64(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64, CliError> {
        let v = match flag {
            Some(v) => v,
            None => match self.file_value(key) {
                Some(v) => {
                    v.as_f64().ok_or_else(|| CliError::Validation(format!("config key {key}: expected a number")))?
                }
                None => default,
            },
        };
        self.resolved.insert(key.into(), Value::from(v));
        Ok(v)
    }

    pub fn u64(&mut self, key: &str, flag: Option<u64>, default: u64) -> Result<u64, CliError> {
        let v = match flag {
            Some(v) => v,
            None => match self.file_value(key) {
                Some(v) => v
                    .as_u64()
                    .ok_or_else(|| CliError::Validation(format!("config key {key}: expected a nonnegative integer")))?,
                None => default,
            },
        };
        self.resolved.insert(key.into(), Value::from(v));
        Ok(v)
    }

    pub fn usize(&mut self, key: &str, flag: Option<usize>, default: usize) -> Result<usize, CliError> {
        Ok(self.u64(key, flag.map(|v| v as u64), default as u64)? as usize)
    }

    pub fn opt_usize(&mut self, key: &str, flag: Option<usize>) -> Result<Option<usize>, CliError> {
        if flag.is_none() && self.file_value(key).is_none() {
            return Ok(None);
        }
        self.usize(key, flag, 0).map(Some)
    }

    pub fn flag(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        let v = flag
            || match self.file_value(key) {
                Some(v) => {
                    v.as_bool().ok_or_else(|| CliError::Validation(format!("config key {key}: expected a boolean")))?
                }
                None => false,
            };
        self.resolved.insert(key.into(), Value::from(v));
        Ok(v)
    }

    /// Repeatable number flag; a config value may be a number or an array.
    pub fn f64_list(&mut self, key: &str, flag: Vec<f64>, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let v = if !flag.is_empty() {
            flag
        } else {
            match self.file_value(key) {
                Some(Value::Array(items)) => items
                    .iter()
                    .map(|x| {
                        x.as_f64().ok_or_else(|| CliError::Validation(format!("config key {key}: expected numbers")))
                    })
                    .collect::<Result<_, _>>()?,
                Some(x) => vec![x
                    .as_f64()
                    .ok_or_else(|| CliError::Validation(format!("config key {key}: expected numbers")))?],
                None => default.to_vec(),
            }
        };
        self.resolved.insert(key.into(), Value::from(v.clone()));
        Ok(v)
    }
}
