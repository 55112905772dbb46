//! Resolved configuration: built-in defaults, then a flat `key = value`
//! file, then command-line flags. Every resolved value is echoed into the
//! run manifest.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::{CliError, Result};

/// A recognised key and its default, if it has one.
pub type KeySpec = (&'static str, Option<&'static str>);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn resolve(keys: &[KeySpec], file: Option<&Path>, flags: &[(&str, Option<String>)]) -> Result<Self> {
        let mut values: BTreeMap<String, String> =
            keys.iter().filter_map(|(k, d)| d.map(|d| (k.to_string(), d.to_string()))).collect();
        let known = |key: &str| keys.iter().any(|(k, _)| *k == key);
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            for (key, value) in parse_config(&text).map_err(|m| CliError::usage(format!("{}: {m}", path.display())))? {
                if !known(&key) {
                    return Err(CliError::usage(format!("{}: unknown key `{key}`", path.display())));
                }
                values.insert(key, value);
            }
        }
        for (key, value) in flags {
            debug_assert!(known(key), "flag `{key}` missing from the key table");
            if let Some(v) = value {
                values.insert(key.to_string(), v.clone());
            }
        }
        Ok(Settings { values })
    }

    pub fn from_pairs<K: Into<String>, V: Into<String>>(pairs: impl IntoIterator<Item = (K, V)>) -> Self {
        Settings { values: pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect() }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| CliError::usage(format!("missing required setting `{key}`")))
    }

    pub fn parse<T>(&self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        let raw = self.require(key)?;
        raw.parse().map_err(|e| CliError::usage(format!("invalid `{key}` = `{raw}`: {e}")))
    }

    pub fn parse_opt<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get(key).map(|_| self.parse(key)).transpose()
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None => Ok(false),
            Some("true" | "yes" | "1" | "on") => Ok(true),
            Some("false" | "no" | "0" | "off") => Ok(false),
            Some(other) => Err(CliError::usage(format!("invalid `{key}` = `{other}`: expected true or false"))),
        }
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}

/// `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> std::result::Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| format!("line {}: expected `key = value`", n + 1))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(format!("line {}: empty key", n + 1));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}
