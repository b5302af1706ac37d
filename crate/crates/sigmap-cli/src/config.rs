//! Flat key=value configuration with `[section]` headers; section names
//! prefix keys with a dot (`[train]` + `batch=8` → `train.batch`). Every
//! value can be overridden from the command line.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> CliResult<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|m| CliError::Usage(format!("{}: {m}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Config, String> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
            let key = if section.is_empty() {
                key.trim().to_string()
            } else {
                format!("{section}.{}", key.trim())
            };
            values.insert(key, value.trim().to_string());
        }
        Ok(Config { values })
    }

    /// Applies `key=value` command-line overrides (keys already dotted).
    pub fn apply_overrides(&mut self, overrides: &[String]) -> CliResult<()> {
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("override '{o}' is not key=value")))?;
            self.set(k.trim(), v.trim());
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn get_or(&self, key: &str, default: &str) -> String {
        self.get(key).unwrap_or(default).to_string()
    }

    pub fn get_f64(&self, key: &str, default: f64) -> CliResult<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| CliError::Usage(format!("{key}: '{s}' is not a number"))),
        }
    }

    pub fn get_usize(&self, key: &str, default: usize) -> CliResult<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| CliError::Usage(format!("{key}: '{s}' is not an integer"))),
        }
    }

    pub fn get_bool(&self, key: &str, default: bool) -> CliResult<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") => Ok(true),
            Some("false") | Some("0") => Ok(false),
            Some(s) => Err(CliError::Usage(format!("{key}: '{s}' is not a boolean"))),
        }
    }

    /// Comma-separated list of numbers.
    pub fn get_f64_list(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse()
                        .map_err(|_| CliError::Usage(format!("{key}: '{p}' is not a number")))
                })
                .collect::<CliResult<Vec<f64>>>()
                .map(Some),
        }
    }

    /// Canonical sorted `key=value` rendering, used for provenance hashing.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_prefix_keys() {
        let c = Config::parse("seed=7\n[train]\nbatch = 8\nlr=0.001\n[noise]\nr=40\n").unwrap();
        assert_eq!(c.get("seed"), Some("7"));
        assert_eq!(c.get("train.batch"), Some("8"));
        assert_eq!(c.get_f64("noise.r", 0.0).unwrap(), 40.0);
        assert_eq!(c.get_usize("train.batch", 0).unwrap(), 8);
    }

    #[test]
    fn comments_blank_lines_and_defaults() {
        let c = Config::parse("# top\n\na=1\n  # indented comment\n").unwrap();
        assert_eq!(c.get_usize("a", 0).unwrap(), 1);
        assert_eq!(c.get_usize("missing", 9).unwrap(), 9);
        assert!(c.get_f64("a", 0.0).is_ok());
        assert!(Config::parse("not a pair\n").is_err());
    }

    #[test]
    fn overrides_and_canonical_form() {
        let mut c = Config::parse("b=2\na=1\n").unwrap();
        c.apply_overrides(&["a=10".into(), "train.lr=0.5".into()]).unwrap();
        assert_eq!(c.canonical(), "a=10\nb=2\ntrain.lr=0.5\n");
        assert!(c.apply_overrides(&["nope".into()]).is_err());
    }

    #[test]
    fn list_and_bool_parsing() {
        let c = Config::parse("sigmas=5, 10,15\nclip=true\n").unwrap();
        assert_eq!(c.get_f64_list("sigmas").unwrap().unwrap(), vec![5.0, 10.0, 15.0]);
        assert!(c.get_bool("clip", false).unwrap());
        assert_eq!(c.get_f64_list("absent").unwrap(), None);
    }
}
