//! Flat key-value configuration files with a JSON alternative.
//!
//! The native format is one `key = value` pair per line with `#`
//! comments and a mandatory `schema = 1` entry. A file whose first
//! non-blank byte is `{` (or with a `.json` extension) is parsed as a
//! JSON object instead; scalars, arrays, and nested arrays map onto the
//! same string values the flat format uses (arrays comma-joined, rows
//! of nested arrays joined with `;`).

use anyhow::{anyhow, bail, Context, Result};
use std::collections::BTreeMap;
use std::path::Path;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Default)]
pub struct KvMap {
    entries: BTreeMap<String, String>,
}

fn json_value_to_string(v: &serde_json::Value) -> Result<String> {
    Ok(match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Number(n) => n.to_string(),
        serde_json::Value::Bool(b) => b.to_string(),
        serde_json::Value::Array(items) => {
            let parts: Vec<String> = items
                .iter()
                .map(|item| match item {
                    serde_json::Value::Array(row) => {
                        let cells: Vec<String> = row.iter().map(json_value_to_string).collect::<Result<_>>()?;
                        Ok(cells.join(","))
                    }
                    other => json_value_to_string(other),
                })
                .collect::<Result<_>>()?;
            if items.iter().any(|i| i.is_array()) {
                parts.join(";")
            } else {
                parts.join(",")
            }
        }
        other => bail!("unsupported JSON value {other}"),
    })
}

impl KvMap {
    pub fn parse_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let looks_json = path.extension().is_some_and(|e| e == "json")
            || text.trim_start().starts_with('{');
        let map = if looks_json {
            Self::parse_json(&text).with_context(|| format!("parsing {} as JSON", path.display()))?
        } else {
            Self::parse_flat(&text).with_context(|| format!("parsing {}", path.display()))?
        };
        match map.get("schema") {
            Some(v) if v == SCHEMA_VERSION => Ok(map),
            Some(v) => bail!("{}: unsupported schema version {v:?} (expected {SCHEMA_VERSION})", path.display()),
            None => bail!("{}: missing required `schema` entry", path.display()),
        }
    }

    pub fn parse_flat(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, got {line:?}", idx + 1))?;
            let key = key.trim().to_lowercase();
            if key.is_empty() {
                bail!("line {}: empty key", idx + 1);
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                bail!("line {}: duplicate key {key:?}", idx + 1);
            }
        }
        Ok(Self { entries })
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value.as_object().ok_or_else(|| anyhow!("top level must be a JSON object"))?;
        let mut entries = BTreeMap::new();
        for (k, v) in obj {
            entries.insert(k.to_lowercase(), json_value_to_string(v)?);
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn parse_scalar<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow!("key {key:?}: cannot parse {raw:?}: {e}")),
        }
    }

    pub fn parse_vec_f64(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => {
                let items: Vec<f64> = raw
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().map_err(|e| anyhow!("key {key:?}: bad number {s:?}: {e}")))
                    .collect::<Result<_>>()?;
                Ok(Some(items))
            }
        }
    }

    /// Semicolon-separated rows of comma-separated numbers.
    pub fn parse_matrix(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => {
                let rows: Vec<Vec<f64>> = raw
                    .split(';')
                    .map(|row| {
                        row.split(',')
                            .map(|s| s.trim().parse::<f64>().map_err(|e| anyhow!("key {key:?}: bad number {s:?}: {e}")))
                            .collect::<Result<Vec<f64>>>()
                    })
                    .collect::<Result<_>>()?;
                Ok(Some(rows))
            }
        }
    }
}
