//! Run parameters from `key = value` files and command-line flags.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use gbtsvm_core::feature_map::Activation;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

/// Every parameter of one run, after merging file and flags. Embedded in
/// each report so the run can be repeated exactly.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub params: BTreeMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

/// Parses `key = value` lines; blank lines and `#` comments are ignored.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| AppError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = normalize_key(k);
        if key.is_empty() {
            return Err(AppError::Usage(format!("config line {}: empty key", i + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

impl RunConfig {
    /// Merges `file` (if any) and `flags`, flags winning. Keys outside
    /// `allowed` are rejected.
    pub fn build(command: &str, allowed: &[&str], file: Option<&Path>, flags: BTreeMap<String, String>) -> Result<Self> {
        let mut params = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(AppError::io(path))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        params.extend(flags.into_iter().map(|(k, v)| (normalize_key(&k), v)));
        if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(AppError::Usage(format!("unknown key `{bad}` for command `{command}`")));
        }
        Ok(RunConfig { command: command.to_string(), params })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| AppError::Usage(format!("invalid value `{v}` for `{key}`: {e}"))))
            .transpose()
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?.ok_or_else(|| AppError::Usage(format!("`{}` requires --{key}", self.command)))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<T>().map_err(|e| AppError::Usage(format!("invalid entry `{s}` in `{key}`: {e}"))))
                    .collect()
            })
            .transpose()
    }

    pub fn flag(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => match v.to_ascii_lowercase().as_str() {
                "1" | "true" | "yes" | "on" => Ok(true),
                "0" | "false" | "no" | "off" => Ok(false),
                _ => Err(AppError::Usage(format!("invalid boolean `{v}` for `{key}`"))),
            },
        }
    }

    /// The master seed; every stochastic command needs one.
    pub fn seed(&self) -> Result<u64> {
        self.require("seed")
    }
}

/// Activation by index `1..=9` or by name.
pub fn parse_activation(s: &str) -> Result<Activation> {
    let s = s.trim();
    if let Ok(i) = s.parse::<u8>() {
        return Activation::from_index(i).map_err(|e| AppError::Usage(e.to_string()));
    }
    Activation::ALL
        .into_iter()
        .find(|a| a.name().eq_ignore_ascii_case(s))
        .ok_or_else(|| AppError::Usage(format!("unknown activation `{s}`")))
}
