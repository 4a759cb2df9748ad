//! Plain `key = value` configuration files.
//!
//! Keys mirror the long CLI flag names (`chi`, `n-cells`, `seed`, ...).
//! Blank lines and `#` comments are ignored and values may be quoted, so a
//! flat TOML table parses as well. Command-line flags take precedence over
//! file values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Environment variable naming the config file used when none is given.
pub const CONFIG_ENV: &str = "AWM_CONFIG";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            let key = key.trim().replace('_', "-");
            let value = value.trim().trim_matches('"').to_string();
            if key.is_empty() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: "empty key".into(),
                });
            }
            entries.insert(key, value);
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Loads `explicit` if given, else the file named by [`CONFIG_ENV`], else
    /// returns an empty configuration.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        match explicit.map(PathBuf::from).or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from)) {
            Some(path) => Self::load(path),
            None => Ok(Self::default()),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::input(format!("config key '{key}' has unparsable value '{v}'")))
            })
            .transpose()
    }

    /// `flag` if set, else the file value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    /// Like [`ConfigFile::pick`] without a default.
    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_quotes_and_sections() {
        let c = ConfigFile::parse("# run\n[sim]\nchi = 0.05  # tax\nmodel = \"eysm\"\nn_cells=4096\n\n").unwrap();
        assert_eq!(c.get::<f64>("chi").unwrap(), Some(0.05));
        assert_eq!(c.raw("model"), Some("eysm"));
        assert_eq!(c.get::<usize>("n-cells").unwrap(), Some(4096));
        assert_eq!(c.get::<f64>("zeta").unwrap(), None);
    }

    #[test]
    fn flags_override_file() {
        let c = ConfigFile::parse("seed = 3\n").unwrap();
        assert_eq!(c.pick(Some(9u64), "seed", 1).unwrap(), 9);
        assert_eq!(c.pick(None, "seed", 1u64).unwrap(), 3);
        assert_eq!(c.pick(None, "sweeps", 10u64).unwrap(), 10);
    }

    #[test]
    fn errors() {
        assert!(matches!(ConfigFile::parse("a = 1\nnonsense\n"), Err(Error::Parse { line: 2, .. })));
        let c = ConfigFile::parse("chi = abc").unwrap();
        assert!(c.get::<f64>("chi").is_err());
    }
}
