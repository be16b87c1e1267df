//! Plain-text `key = value` experiment configs: flat, diffable, no nesting.

use rfl_core::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct KeyValueConfig {
    entries: BTreeMap<String, String>,
}

impl KeyValueConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigInvalid {
                key: format!("line {}", lineno + 1),
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::ConfigInvalid {
                    key: format!("line {}", lineno + 1),
                    reason: "empty key".into(),
                });
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::ConfigInvalid { key, reason: "duplicate key".into() });
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Reject any key outside the allowed set (validated before any compute).
    pub fn restrict_keys(&self, allowed: &[&str]) -> Result<()> {
        for key in self.entries.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::ConfigInvalid {
                    key: key.clone(),
                    reason: format!("unknown key (allowed: {})", allowed.join(", ")),
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        let raw = self.entries.get(key).ok_or_else(|| Error::ConfigInvalid {
            key: key.into(),
            reason: "missing required key".into(),
        })?;
        raw.parse().map_err(|e| Error::ConfigInvalid {
            key: key.into(),
            reason: format!("not a number ({e})"),
        })
    }

    pub fn require_usize(&self, key: &str) -> Result<usize> {
        let raw = self.entries.get(key).ok_or_else(|| Error::ConfigInvalid {
            key: key.into(),
            reason: "missing required key".into(),
        })?;
        raw.parse().map_err(|e| Error::ConfigInvalid {
            key: key.into(),
            reason: format!("not an integer ({e})"),
        })
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(_) => self.require_f64(key),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    /// Canonical text form (sorted keys) used for hashing.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}
