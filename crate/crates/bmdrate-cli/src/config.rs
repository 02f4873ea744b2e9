//! Plain-text `key = value` configuration files.
//!
//! Precedence: command-line flags override config-file entries, which
//! override built-in defaults.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

/// Keys accepted in a config file (the union of the long flag names).
const KNOWN_KEYS: &[&str] = &[
    "m",
    "snr-min",
    "snr-max",
    "snr-step",
    "snr-db",
    "rates",
    "target-rate",
    "quad-nodes",
    "out",
    "format",
    "seed",
    "dist-file",
    "channel-file",
    "n-list",
    "rate-list",
    "trials",
    "decoder",
    "functional",
    "restarts",
    "free-sign-bit",
];

#[derive(Debug, Default)]
pub struct Config {
    entries: HashMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut entries = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {}: expected `key = value`", lineno + 1);
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("config line {}: unknown key `{key}`", lineno + 1);
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Flag value, then config value, then default.
    pub fn resolve<T>(&self, cli: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.resolve_opt(cli, key)
            .map(|opt| opt.unwrap_or(default))
    }

    /// Flag value, then config value; error when neither is present.
    pub fn resolve_required<T>(&self, cli: Option<T>, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.resolve_opt(cli, key)? {
            Some(v) => Ok(v),
            None => bail!("missing required option `--{key}` (or config key `{key}`)"),
        }
    }

    /// Flag value, then config value, as an optional.
    pub fn resolve_opt<T>(&self, cli: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if cli.is_some() {
            return Ok(cli);
        }
        match self.raw(key) {
            Some(text) => match text.parse() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config key `{key}`: {e}"),
            },
            None => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves_with_precedence() {
        let dir = std::env::temp_dir().join("bmdrate-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("demo.cfg");
        std::fs::write(&path, "# comment\nm = 3\nseed = 9 # tail\n").unwrap();
        let cfg = Config::load(Some(&path)).unwrap();
        // CLI wins
        assert_eq!(cfg.resolve(Some(5usize), "m", 1).unwrap(), 5);
        // config beats default
        assert_eq!(cfg.resolve(None::<usize>, "m", 1).unwrap(), 3);
        assert_eq!(cfg.resolve(None::<u64>, "seed", 0).unwrap(), 9);
        // default when absent everywhere
        assert_eq!(cfg.resolve(None::<usize>, "trials", 17).unwrap(), 17);
    }

    #[test]
    fn rejects_unknown_keys() {
        let dir = std::env::temp_dir().join("bmdrate-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.cfg");
        std::fs::write(&path, "bogus = 1\n").unwrap();
        assert!(Config::load(Some(&path)).is_err());
    }
}
