//! Flat `key = value` configuration with `[section]` headers.
//!
//! A key `k` under `[s]` resolves to `s.k`. Every scenario declares its
//! keys with defaults; files and overrides may only set declared keys.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// One declared key with its default value and a short description.
#[derive(Clone, Copy, Debug)]
pub struct Param {
    pub key: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

pub const fn param(key: &'static str, default: &'static str, help: &'static str) -> Param {
    Param { key, default, help }
}

/// Resolved values, keyed by `section.key`.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

/// Parses the file format into `(section.key, value)` pairs in file order.
pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Config(format!("line {}: unterminated section header", k + 1)))?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", k + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", k + 1)));
        }
        let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
        out.push((full, value.trim().to_string()));
    }
    Ok(out)
}

impl Config {
    pub fn defaults(schema: &[Param]) -> Self {
        Self { values: schema.iter().map(|p| (p.key.to_string(), p.default.to_string())).collect() }
    }

    /// Defaults, then `text`, then `overrides` (`key=value`).
    pub fn resolve(schema: &[Param], text: Option<&str>, overrides: &[String]) -> Result<Self> {
        let mut cfg = Self::defaults(schema);
        if let Some(t) = text {
            for (k, v) in parse(t)? {
                cfg.set(&k, &v)?;
            }
        }
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {o:?} is not `key=value`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(schema: &[Param], path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::resolve(schema, Some(&text), overrides)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self.values.get_mut(key) {
            Some(v) => {
                *v = value.to_string();
                Ok(())
            }
            None => Err(Error::Config(format!("unknown key {key:?}"))),
        }
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn raw(&self, key: &str) -> Result<&str> {
        self.values.get(key).map(String::as_str).ok_or_else(|| Error::Config(format!("missing key {key:?}")))
    }

    fn bad(key: &str, v: &str, what: &str) -> Error {
        Error::Config(format!("{key} = {v:?} is not {what}"))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.raw(key)?;
        v.parse().map_err(|_| Self::bad(key, v, "a number"))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let v = self.raw(key)?;
        v.parse().map_err(|_| Self::bad(key, v, "a non-negative integer"))
    }

    pub fn i64(&self, key: &str) -> Result<i64> {
        let v = self.raw(key)?;
        v.parse().map_err(|_| Self::bad(key, v, "an integer"))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        let v = self.raw(key)?;
        v.parse().map_err(|_| Self::bad(key, v, "a non-negative integer"))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        let v = self.raw(key)?;
        v.parse().map_err(|_| Self::bad(key, v, "true or false"))
    }

    /// Comma- or space-separated numbers.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.raw(key)?;
        v.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| Self::bad(key, v, "a list of numbers")))
            .collect()
    }

    /// `i,j`.
    pub fn pair(&self, key: &str) -> Result<(i64, i64)> {
        let v = self.raw(key)?;
        parse_pair(v).ok_or_else(|| Self::bad(key, v, "an integer pair `i,j`"))
    }

    /// Space-separated `i,j` pairs.
    pub fn pairs(&self, key: &str) -> Result<Vec<(i64, i64)>> {
        let v = self.raw(key)?;
        v.split_whitespace()
            .map(|p| parse_pair(p).ok_or_else(|| Self::bad(key, v, "a list of integer pairs `i,j`")))
            .collect()
    }

    /// Renders the resolved configuration in the file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut current: Option<&str> = None;
        for (k, v) in &self.values {
            let (section, key) = k.split_once('.').unwrap_or(("", k.as_str()));
            if current != Some(section) {
                if current.is_some() {
                    out.push('\n');
                }
                if !section.is_empty() {
                    out.push_str(&format!("[{section}]\n"));
                }
                current = Some(section);
            }
            out.push_str(&format!("{key} = {v}\n"));
        }
        out
    }
}

fn parse_pair(s: &str) -> Option<(i64, i64)> {
    let (a, b) = s.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: &[Param] = &[
        param("wave.a", "0.1", ""),
        param("wave.direction", "1,0", ""),
        param("sim.times", "1 2 3", ""),
        param("seed", "7", ""),
    ];

    #[test]
    fn sections_prefix_keys() {
        let text = "seed = 9 # trailing\n[wave]\na = 0.25\n\n[sim]\ntimes = 0.5, 1.5\n";
        let c = Config::resolve(SCHEMA, Some(text), &[]).unwrap();
        assert_eq!(c.f64("wave.a").unwrap(), 0.25);
        assert_eq!(c.u64("seed").unwrap(), 9);
        assert_eq!(c.f64_list("sim.times").unwrap(), vec![0.5, 1.5]);
        assert_eq!(c.pair("wave.direction").unwrap(), (1, 0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(Config::resolve(SCHEMA, Some("[wave]\nb = 1\n"), &[]), Err(Error::Config(_))));
        assert!(matches!(Config::resolve(SCHEMA, None, &["wave.b=1".into()]), Err(Error::Config(_))));
        assert!(matches!(Config::resolve(SCHEMA, Some("a 1\n"), &[]), Err(Error::Config(_))));
    }

    #[test]
    fn overrides_win_over_the_file() {
        let c = Config::resolve(SCHEMA, Some("[wave]\na = 0.3\n"), &["wave.a = 0.5".into()]).unwrap();
        assert_eq!(c.f64("wave.a").unwrap(), 0.5);
    }

    #[test]
    fn rendering_round_trips() {
        let c = Config::resolve(SCHEMA, None, &["wave.direction=2,1".into()]).unwrap();
        let back = Config::resolve(SCHEMA, Some(&c.to_text()), &[]).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn malformed_values_name_the_key() {
        let c = Config::resolve(SCHEMA, None, &["wave.a=abc".into()]).unwrap();
        let e = c.f64("wave.a").unwrap_err().to_string();
        assert!(e.contains("wave.a"), "{e}");
    }
}
