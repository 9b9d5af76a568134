use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Flat `key = value` settings. Later assignments override earlier ones.
///
/// Files allow blank lines and `#` comments. Lists are comma separated.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn new() -> Self {
        Config::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Config::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1)));
            };
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            c.set(k, v.trim());
        }
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Reads `[--config FILE] [--key value ...]`; overrides win over the file
    /// regardless of their position.
    pub fn from_args<S: AsRef<str>>(args: &[S]) -> Result<Self> {
        let mut file = None;
        let mut overrides = Vec::new();
        let mut it = args.iter().map(|s| s.as_ref());
        while let Some(flag) = it.next() {
            let Some(key) = flag.strip_prefix("--") else {
                return Err(Error::Config(format!("expected `--key value`, got `{flag}`")));
            };
            let Some(value) = it.next() else {
                return Err(Error::Config(format!("`--{key}` needs a value")));
            };
            if key == "config" {
                file = Some(value.to_string());
            } else if key.is_empty() {
                return Err(Error::Config("empty option name".into()));
            } else {
                overrides.push((key.to_string(), value.to_string()));
            }
        }
        let mut c = match file {
            Some(f) => Config::load(f)?,
            None => Config::new(),
        };
        for (k, v) in overrides {
            c.set(&k, &v);
        }
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(|s| s.as_str())
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    pub fn parsed<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|e| Error::Config(format!("{key} = `{s}`: {e}"))),
        }
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        let v: f64 = self.parsed(key, default)?;
        if v.is_nan() {
            return Err(Error::Config(format!("{key} is NaN")));
        }
        Ok(v)
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        self.parsed(key, default)
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64> {
        self.parsed(key, default)
    }

    pub fn string(&self, key: &str, default: &str) -> String {
        self.get(key).unwrap_or(default).to_string()
    }

    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(s) => split_list(s)
                .map(|t| t.parse::<f64>().map_err(|e| Error::Config(format!("{key}: `{t}`: {e}"))))
                .collect(),
        }
    }

    pub fn str_list(&self, key: &str, default: &[&str]) -> Vec<String> {
        match self.get(key) {
            None => default.iter().map(|s| s.to_string()).collect(),
            Some(s) => split_list(s).map(|t| t.to_string()).collect(),
        }
    }

    /// `k=v` pairs joined by `;`, in key order.
    pub fn echo(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_lists() {
        let c = Config::parse("# header\np = 2.5\n\nz = 0.1, 1 ,10 # trailing\nname=x").unwrap();
        assert_eq!(c.f64("p", 0.0).unwrap(), 2.5);
        assert_eq!(c.f64_list("z", &[]).unwrap(), vec![0.1, 1.0, 10.0]);
        assert_eq!(c.string("name", ""), "x");
        assert_eq!(c.usize("missing", 7).unwrap(), 7);
        assert!(Config::parse("no equals sign").is_err());
    }

    #[test]
    fn overrides_win() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("job.cfg");
        std::fs::write(&f, "p = 2\nq = 2\n").unwrap();
        let args = ["--p", "3", "--config", f.to_str().unwrap()];
        let c = Config::from_args(&args).unwrap();
        assert_eq!(c.f64("p", 0.0).unwrap(), 3.0);
        assert_eq!(c.f64("q", 0.0).unwrap(), 2.0);
        assert!(Config::from_args(&["--p"]).is_err());
        assert!(Config::from_args(&["p", "2"]).is_err());
    }

    #[test]
    fn bad_numbers_are_config_errors() {
        let c = Config::parse("p = two").unwrap();
        assert!(matches!(c.f64("p", 1.0), Err(Error::Config(_))));
    }
}
