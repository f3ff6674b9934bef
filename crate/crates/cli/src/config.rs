//! Flat `key = value` experiment configs.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use randiso::rational::{parse as qparse, Q};

use crate::error::{CliError, Result};

/// One `key = value` per line; `#` starts a comment line.
#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, (usize, String)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| CliError::Config { line, message: format!("expected `key = value`, found {l:?}") })?;
            let key = k.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(CliError::Config { line, message: format!("invalid key {key:?}") });
            }
            if entries.insert(key.to_string(), (line, v.trim().to_string())).is_some() {
                return Err(CliError::Config { line, message: format!("duplicate key {key:?}") });
            }
        }
        Ok(Self { entries })
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), (0, value.into()));
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Rejects keys outside `allowed`, naming the first offending line.
    pub fn expect_keys(&self, allowed: &[&str]) -> Result<()> {
        let mut unknown: Vec<_> = self.entries.iter().filter(|(k, _)| !allowed.contains(&k.as_str())).collect();
        unknown.sort_by_key(|(_, (line, _))| *line);
        match unknown.first() {
            Some((k, (line, _))) => Err(CliError::Config { line: *line, message: format!("unknown key {k:?}") }),
            None => Ok(()),
        }
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.entries
            .get(key)
            .map(|(line, v)| {
                v.parse().map_err(|e: T::Err| CliError::Config { line: *line, message: format!("{key}: {e}") })
            })
            .transpose()
    }

    pub fn get_or<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T>(&self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get(key)?.ok_or_else(|| CliError::MissingKey(key.to_string()))
    }

    pub fn rational(&self, key: &str) -> Result<Option<Q>> {
        self.entries
            .get(key)
            .map(|(line, v)| qparse(v).map_err(|e| CliError::Config { line: *line, message: format!("{key}: {e}") }))
            .transpose()
    }

    pub fn rational_or(&self, key: &str, default: Q) -> Result<Q> {
        Ok(self.rational(key)?.unwrap_or(default))
    }

    /// The sampling seed; every command that draws random inputs needs one.
    pub fn seed(&self) -> Result<u64> {
        self.get("seed")?.ok_or_else(|| CliError::MissingKey("seed".into()))
    }

    /// Canonical `key = value` text, used for the report digest.
    pub fn canonical(&self) -> String {
        self.entries.iter().map(|(k, (_, v))| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use randiso::rational::ratio;

    #[test]
    fn parses_and_reports_lines() {
        let c = Config::parse("# demo\nwindow = 4\n\neps = 1/8\n").unwrap();
        assert_eq!(c.require::<usize>("window").unwrap(), 4);
        assert_eq!(c.rational("eps").unwrap(), Some(ratio(1, 8)));
        let err = Config::parse("a = 1\nnonsense\n").unwrap_err();
        assert_eq!(err.to_string(), "config line 2: expected `key = value`, found \"nonsense\"");
        let c = Config::parse("window = x\n").unwrap();
        assert!(c.require::<usize>("window").unwrap_err().to_string().starts_with("config line 1"));
        assert!(Config::parse("a = 1\na = 2").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let c = Config::parse("window = 4\nbogus = 1\n").unwrap();
        let err = c.expect_keys(&["window"]).unwrap_err();
        assert_eq!(err.to_string(), "config line 2: unknown key \"bogus\"");
    }

    #[test]
    fn canonical_text_ignores_layout() {
        let a = Config::parse("b = 2\n  a=1").unwrap();
        let b = Config::parse("# x\na = 1\nb = 2\n").unwrap();
        assert_eq!(a.canonical(), b.canonical());
    }
}
