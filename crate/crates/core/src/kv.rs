//! Minimal `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored; keys may repeat.

use crate::error::{DmdError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KvEntry {
    /// 1-based line number.
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse_kv(text: &str) -> Result<Vec<KvEntry>> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| DmdError::Parse {
            line: idx + 1,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(DmdError::Parse {
                line: idx + 1,
                message: "empty key".into(),
            });
        }
        entries.push(KvEntry {
            line: idx + 1,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(entries)
}

impl KvEntry {
    pub fn parse<T: std::str::FromStr>(&self) -> Result<T> {
        self.value.parse().map_err(|_| self.error(format!("invalid value `{}`", self.value)))
    }

    /// Comma-separated list of values.
    pub fn parse_list<T: std::str::FromStr>(&self) -> Result<Vec<T>> {
        self.value
            .split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| self.error(format!("invalid list element `{}`", v.trim())))
            })
            .collect()
    }

    pub fn error(&self, message: String) -> DmdError {
        DmdError::Parse {
            line: self.line,
            message: format!("key `{}`: {message}", self.key),
        }
    }

    pub fn unknown(&self) -> DmdError {
        DmdError::Parse {
            line: self.line,
            message: format!("unknown key `{}`", self.key),
        }
    }
}
