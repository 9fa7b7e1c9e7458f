//! Flat `key = value` configuration with dotted section names.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Parsed configuration. Every lookup is recorded so that keys nobody
/// asked for can be reported as unknown.
#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

fn valid_key(k: &str) -> bool {
    !k.is_empty()
        && k.split('.').all(|part| {
            !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        })
}

impl Config {
    /// Lines are `key = value`; `#` starts a comment; blank lines are
    /// skipped. Repeated keys are an error.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if !valid_key(k) {
                return Err(err(format!("invalid key `{k}`")));
            }
            if cfg.entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(err(format!("key `{k}` given twice")));
            }
        }
        Ok(cfg)
    }

    /// Sets or replaces a key.
    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) -> Result<()> {
        let key = key.into();
        if !valid_key(&key) {
            return Err(Error::Config(format!("invalid key `{key}`")));
        }
        self.entries.insert(key, value.into());
        Ok(())
    }

    /// Applies `key=value` overrides.
    pub fn apply_overrides<'a>(&mut self, pairs: impl IntoIterator<Item = &'a str>) -> Result<()> {
        for p in pairs {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{p}` is not `key=value`")))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Fills in `defaults` for keys that are not set.
    pub fn with_defaults(mut self, defaults: &[(&str, &str)]) -> Self {
        for (k, v) in defaults {
            self.entries.entry((*k).to_string()).or_insert_with(|| (*v).to_string());
        }
        self
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    pub fn contains(&self, key: &str) -> bool {
        self.used.borrow_mut().insert(key.to_string());
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.entries.get(key).map(String::as_str)
    }

    pub fn required(&self, key: &str) -> Result<&str> {
        self.raw(key).ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    fn parse_value<T: FromStr>(key: &str, s: &str) -> Result<T> {
        s.parse()
            .map_err(|_| Error::Config(format!("cannot parse `{s}` for key `{key}`")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key).map(|s| Self::parse_value(key, s)).transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        Self::parse_value(key, self.required(key)?)
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.raw(key)
            .map(|s| s.split(',').map(|x| Self::parse_value(key, x.trim())).collect())
            .transpose()
    }

    pub fn require_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        self.list(key)?
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    /// Errors on the first key that was never looked up.
    pub fn ensure_all_used(&self) -> Result<()> {
        let used = self.used.borrow();
        match self.entries.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(Error::Config(format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_lists() {
        let cfg = Config::parse("# header\ngrid.n = 32, 32 # trailing\n\nfit.lo=20\nname = h1\n").unwrap();
        assert_eq!(cfg.list::<usize>("grid.n").unwrap(), Some(vec![32, 32]));
        assert_eq!(cfg.require::<usize>("fit.lo").unwrap(), 20);
        assert_eq!(cfg.raw("name"), Some("h1"));
        assert!(cfg.ensure_all_used().is_ok());
    }

    #[test]
    fn reports_unknown_and_malformed_keys() {
        let cfg = Config::parse("grid.n = 8\ngrid.nn = 9").unwrap();
        cfg.raw("grid.n");
        let err = cfg.ensure_all_used().unwrap_err().to_string();
        assert!(err.contains("grid.nn"), "{err}");
        assert!(matches!(Config::parse("a = 1\na = 2"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Config::parse("just text"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(Config::parse("a..b = 1"), Err(Error::Parse { .. })));
        let cfg = Config::parse("x = abc").unwrap();
        assert!(matches!(cfg.require::<f64>("x"), Err(Error::Config(_))));
        assert!(matches!(cfg.require::<f64>("y"), Err(Error::Config(_))));
    }

    #[test]
    fn defaults_and_overrides() {
        let mut cfg = Config::parse("a = 1").unwrap().with_defaults(&[("a", "5"), ("b", "2")]);
        cfg.apply_overrides(["b=3", "c = x"]).unwrap();
        assert_eq!(cfg.raw("a"), Some("1"));
        assert_eq!(cfg.raw("b"), Some("3"));
        assert_eq!(cfg.raw("c"), Some("x"));
        assert!(cfg.apply_overrides(["nope"]).is_err());
        assert_eq!(cfg.get_or("missing", 4.5).unwrap(), 4.5);
        assert_eq!(cfg.list::<f64>("z").unwrap(), None);
        assert_eq!(Config::parse("w = inf").unwrap().require::<f64>("w").unwrap(), f64::INFINITY);
    }
}
