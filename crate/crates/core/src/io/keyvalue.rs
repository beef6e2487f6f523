//! Flat `key = value` text files. `#` starts a comment; blank lines are
//! ignored.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse_entries(text: &str, origin: &Path) -> Result<Vec<Entry>> {
    let mut entries = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::parse(origin, n + 1, format!("expected `key = value`, found `{line}`")));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::parse(origin, n + 1, "empty key"));
        }
        entries.push(Entry {
            line: n + 1,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(entries)
}

/// Typed access to parsed entries with unknown/missing/duplicate key
/// detection.
pub struct Fields<'a> {
    origin: &'a Path,
    entries: Vec<Entry>,
    allowed: &'a [&'a str],
    repeatable: &'a [&'a str],
}

impl<'a> Fields<'a> {
    pub fn new(
        origin: &'a Path,
        entries: Vec<Entry>,
        allowed: &'a [&'a str],
        repeatable: &'a [&'a str],
    ) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if !allowed.contains(&e.key.as_str()) {
                return Err(Error::Config(format!(
                    "{}:{}: unknown key `{}`",
                    origin.display(),
                    e.line,
                    e.key
                )));
            }
            if !repeatable.contains(&e.key.as_str()) && entries[..i].iter().any(|p| p.key == e.key) {
                return Err(Error::Config(format!(
                    "{}:{}: duplicate key `{}`",
                    origin.display(),
                    e.line,
                    e.key
                )));
            }
        }
        Ok(Self {
            origin,
            entries,
            allowed,
            repeatable,
        })
    }

    fn entry(&self, key: &str) -> Option<&Entry> {
        debug_assert!(self.allowed.contains(&key));
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn all(&self, key: &str) -> Vec<&Entry> {
        debug_assert!(self.repeatable.contains(&key));
        self.entries.iter().filter(|e| e.key == key).collect()
    }

    pub fn invalid(&self, entry: &Entry, msg: impl std::fmt::Display) -> Error {
        Error::Config(format!(
            "{}:{}: `{}`: {msg}",
            self.origin.display(),
            entry.line,
            entry.key
        ))
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|_| self.invalid(e, format!("invalid value `{}`", e.value))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T> {
        self.opt(key)?
            .ok_or_else(|| Error::Config(format!("{}: missing required key `{key}`", self.origin.display())))
    }

    /// A path value resolved relative to the directory holding the file.
    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.entry(key).map(|e| resolve(self.origin, &e.value))
    }

    pub fn required_path(&self, key: &str) -> Result<PathBuf> {
        self.path(key)
            .ok_or_else(|| Error::Config(format!("{}: missing required key `{key}`", self.origin.display())))
    }
}

pub fn resolve(origin: &Path, value: &str) -> PathBuf {
    let p = Path::new(value);
    if p.is_absolute() {
        return p.to_path_buf();
    }
    match origin.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => dir.join(p),
        _ => p.to_path_buf(),
    }
}
