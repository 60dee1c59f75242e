//! Flat `key=value` configuration text with `#` comments.

use std::collections::BTreeMap;
use std::str::FromStr;

use super::CliError;

/// Parsed `key=value` pairs in key order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    /// Parses configuration text. Everything after `#` on a line is a
    /// comment; blank lines are skipped; keys must be unique.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("line {}: expected key=value, got `{line}`", lineno + 1)))?;
            cfg.insert(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    /// Builds a config from command-line `key=value` words.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[S]) -> Result<Self, CliError> {
        let mut cfg = Config::default();
        for p in pairs {
            let p = p.as_ref();
            let (k, v) = p.split_once('=').ok_or_else(|| CliError::Usage(format!("expected key=value, got `{p}`")))?;
            cfg.insert(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    fn insert(&mut self, k: &str, v: &str) -> Result<(), CliError> {
        if k.is_empty() {
            return Err(CliError::Usage("empty key".into()));
        }
        if self.entries.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::Usage(format!("duplicate key `{k}`")));
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Value of a required key.
    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key).ok_or_else(|| CliError::MissingKey(key.to_string()))
    }

    /// Parsed value of a required key.
    pub fn require_parse<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        let v = self.require(key)?;
        v.parse().map_err(|_| CliError::InvalidValue { key: key.to_string(), value: v.to_string() })
    }

    /// Parsed value of an optional key.
    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| CliError::InvalidValue { key: key.to_string(), value: v.to_string() }),
        }
    }

    /// Comma-separated list under a required key.
    pub fn require_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, CliError> {
        let v = self.require(key)?;
        v.split(',')
            .map(|s| s.trim().parse().map_err(|_| CliError::InvalidValue { key: key.to_string(), value: v.to_string() }))
            .collect()
    }

    /// Rejects keys outside `allowed`.
    pub fn check_known(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Usage(format!("unknown key `{k}` (expected one of: {})", allowed.join(", ")))),
            None => Ok(()),
        }
    }

    /// Canonical text, one sorted `key=value` per line.
    pub fn canonical(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
