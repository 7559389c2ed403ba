//! Experiment configuration: `key = value` files merged with command-line
//! overrides, plus typed accessors that record every resolved value.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use multidqi::asymptotics::grid;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("config line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("config line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("unknown key `{key}` for `{subcommand}`")]
    UnknownKey { key: String, subcommand: String },
    #[error("config is for `{found}`, not `{expected}`")]
    WrongSubcommand { found: String, expected: String },
    #[error("bad value for `{key}`: `{value}` ({reason})")]
    BadValue { key: String, value: String, reason: String },
}

/// Keys accepted in any config file regardless of subcommand.
pub const GLOBAL_KEYS: [&str; 5] = ["subcommand", "seed", "out", "cap", "strict-distance"];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: k + 1 })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::Syntax { line: k + 1 });
        }
        if out.iter().any(|(_, existing, _)| existing == key) {
            return Err(ConfigError::Duplicate {
                line: k + 1,
                key: key.to_string(),
            });
        }
        out.push((k + 1, key.to_string(), value.to_string()));
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// The fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub subcommand: String,
    pub seed: u64,
    pub out: std::path::PathBuf,
    pub cap: u64,
    pub strict_distance: bool,
    pub params: Params,
}

/// Subcommand parameters. Every typed read stores the value it resolved to
/// (explicit or default) so the manifest can echo the complete setup.
#[derive(Debug, Clone, Default)]
pub struct Params {
    raw: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Params {
    /// Merges file entries with command-line values (which win). File keys
    /// outside `allowed` and [`GLOBAL_KEYS`] are rejected.
    pub fn merge(
        subcommand: &str,
        allowed: &[String],
        file: &[(usize, String, String)],
        cli: &[(String, Option<String>)],
    ) -> Result<Self, ConfigError> {
        let mut raw = BTreeMap::new();
        for (_, key, value) in file {
            if GLOBAL_KEYS.contains(&key.as_str()) {
                continue;
            }
            if !allowed.contains(key) {
                return Err(ConfigError::UnknownKey {
                    key: key.clone(),
                    subcommand: subcommand.to_string(),
                });
            }
            raw.insert(key.clone(), value.clone());
        }
        for (key, value) in cli {
            if let Some(v) = value {
                raw.insert(key.clone(), v.clone());
            }
        }
        Ok(Self {
            raw,
            resolved: BTreeMap::new(),
        })
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }

    fn bad(key: &str, value: &str, reason: impl Display) -> ConfigError {
        ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        }
    }

    fn scalar<T: FromStr + Display>(&mut self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: Display,
    {
        let value = match self.raw.get(key) {
            Some(text) => text.parse::<T>().map_err(|e| Self::bad(key, text, e))?,
            None => default,
        };
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    pub fn f64(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.scalar(key, default)
    }

    pub fn usize(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        self.scalar(key, default)
    }

    pub fn u32(&mut self, key: &str, default: u32) -> Result<u32, ConfigError> {
        self.scalar(key, default)
    }

    pub fn string(&mut self, key: &str, default: &str) -> Result<String, ConfigError> {
        self.scalar(key, default.to_string())
    }

    /// Optional string without a default; recorded as empty when absent.
    pub fn optional(&mut self, key: &str) -> Option<String> {
        let value = self.raw.get(key).cloned();
        self.resolved.insert(key.to_string(), value.clone().unwrap_or_default());
        value
    }

    fn list<T: FromStr + Display>(&mut self, key: &str, default: &[T]) -> Result<Vec<T>, ConfigError>
    where
        T::Err: Display,
        T: Clone,
    {
        let values = match self.raw.get(key) {
            Some(text) => text
                .split(',')
                .map(|item| item.trim().parse::<T>().map_err(|e| Self::bad(key, text, e)))
                .collect::<Result<Vec<T>, _>>()?,
            None => default.to_vec(),
        };
        self.resolved.insert(key.to_string(), join(&values));
        Ok(values)
    }

    pub fn f64_list(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        self.list(key, default)
    }

    pub fn usize_list(&mut self, key: &str, default: &[usize]) -> Result<Vec<usize>, ConfigError> {
        self.list(key, default)
    }

    /// `start:stop:step` or a comma-separated list.
    pub fn grid(&mut self, key: &str, default: &str) -> Result<Vec<f64>, ConfigError> {
        let text = self.raw.get(key).cloned().unwrap_or_else(|| default.to_string());
        let values = parse_grid(&text).map_err(|reason| Self::bad(key, &text, reason))?;
        self.resolved.insert(key.to_string(), text);
        Ok(values)
    }
}

pub fn join<T: Display>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let number = |s: &str| s.trim().parse::<f64>().map_err(|e| e.to_string());
    match parts[..] {
        [start, stop, step] => {
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if !(step > 0.0 && stop >= start) {
                return Err("need start <= stop and a positive step".into());
            }
            Ok(grid(start, stop, step))
        }
        [single] => single.split(',').map(number).collect(),
        _ => Err("expected start:stop:step or a list".into()),
    }
}
