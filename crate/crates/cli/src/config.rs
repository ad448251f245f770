//! Flat `key = value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    File { line: usize },
    Flag,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::File { line } => write!(f, "config line {line}"),
            Source::Flag => f.write_str("command line"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry {
    pub value: String,
    pub source: Source,
}

/// Resolved parameters for one command; later sources override earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Params {
    entries: BTreeMap<String, Entry>,
}

/// Inclusive grid `start:stop:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("expected start:stop:count, got '{s}'"));
        };
        let start: f64 = a.parse().map_err(|_| format!("bad grid start '{a}'"))?;
        let stop: f64 = b.parse().map_err(|_| format!("bad grid stop '{b}'"))?;
        let count: usize = n.parse().map_err(|_| format!("bad grid count '{n}'"))?;
        if count == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(format!("grid '{s}' needs finite ends and count ≥ 1"));
        }
        if count == 1 && start != stop {
            return Err(format!("grid '{s}' with one point needs start == stop"));
        }
        Ok(Grid { start, stop, count })
    }
}

impl Params {
    /// Parses a config file, accepting only `allowed` keys. A `command` key, if
    /// present, must name `command`.
    pub fn from_file(path: &Path, command: &str, allowed: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::config(None, None, format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text, command, allowed)
    }

    pub fn parse(text: &str, command: &str, allowed: &[String]) -> Result<Self, CliError> {
        let mut params = Params::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(CliError::config(
                    Some(line),
                    None,
                    format!("expected 'key = value', got '{body}'"),
                ));
            };
            let (key, value) = (key.trim().replace('_', "-"), value.trim());
            if key == "command" {
                if value != command {
                    return Err(CliError::config(
                        Some(line),
                        Some("command"),
                        format!("config is for '{value}' but '{command}' was invoked"),
                    ));
                }
                continue;
            }
            if !allowed.iter().any(|k| *k == key) {
                return Err(CliError::config(
                    Some(line),
                    Some(&key),
                    format!("unknown key for '{command}'"),
                ));
            }
            if value.is_empty() {
                return Err(CliError::config(
                    Some(line),
                    Some(&key),
                    "empty value".into(),
                ));
            }
            if params.entries.contains_key(&key) {
                return Err(CliError::config(
                    Some(line),
                    Some(&key),
                    "key given twice".into(),
                ));
            }
            params.entries.insert(
                key,
                Entry {
                    value: value.to_string(),
                    source: Source::File { line },
                },
            );
        }
        Ok(params)
    }

    pub fn set_flag(&mut self, key: &str, value: String) {
        self.entries.insert(
            key.to_string(),
            Entry {
                value,
                source: Source::Flag,
            },
        );
    }

    pub fn entries(&self) -> &BTreeMap<String, Entry> {
        &self.entries
    }

    fn fail(&self, key: &str, msg: impl Into<String>) -> CliError {
        let line = match self.entries.get(key).map(|e| &e.source) {
            Some(Source::File { line }) => Some(*line),
            _ => None,
        };
        CliError::config(line, Some(key), msg.into())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| self.fail(key, format!("cannot parse '{v}'"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v: f64 = self.get_or(key, default)?;
        if !v.is_finite() {
            return Err(self.fail(key, "must be finite"));
        }
        Ok(v)
    }

    pub fn positive(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.f64_or(key, default)?;
        if !(v > 0.0) {
            return Err(self.fail(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    pub fn non_negative(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.f64_or(key, default)?;
        if !(v >= 0.0) {
            return Err(self.fail(key, format!("must be non-negative, got {v}")));
        }
        Ok(v)
    }

    /// Comma-separated list of numbers.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| self.fail(key, format!("bad list element '{s}'")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn grid(&self, key: &str) -> Result<Option<Grid>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e: String| self.fail(key, e)),
        }
    }

    /// One of `choices`, defaulting to `choices[0]`.
    pub fn choice<'a>(&self, key: &str, choices: &[&'a str]) -> Result<&'a str, CliError> {
        match self.raw(key) {
            None => Ok(choices[0]),
            Some(v) => choices.iter().find(|c| **c == v).copied().ok_or_else(|| {
                self.fail(
                    key,
                    format!("expected one of {}, got '{v}'", choices.join("|")),
                )
            }),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.get(key)?.ok_or_else(|| self.fail(key, "required"))
    }
}
