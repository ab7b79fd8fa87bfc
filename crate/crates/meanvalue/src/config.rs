//! Experiment configuration: an optional TOML file overlaid with CLI flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use meanvalue_core::Execution;
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_OUT: &str = "results";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    /// CSV artifacts plus a summary.
    #[default]
    Csv,
    /// Summary on stdout only.
    TextSummary,
}

/// Contents of a `--config` file.
///
/// ```toml
/// seed = 11
/// out = "runs/a"
/// format = "csv"
///
/// [params]
/// k = [1, 5, 20]
/// eps = 0.01
/// ```
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    #[serde(default)]
    pub params: BTreeMap<String, toml::Value>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

fn value_to_string(v: &toml::Value) -> Result<String, CliError> {
    Ok(match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::Array(items) => items.iter().map(value_to_string).collect::<Result<Vec<_>, _>>()?.join(","),
        other => return Err(CliError::Usage(format!("unsupported parameter value {other}"))),
    })
}

/// Parses `key=value`.
pub fn parse_override(raw: &str) -> Result<(String, String), CliError> {
    match raw.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(CliError::Usage(format!("parameter `{raw}` is not of the form key=value"))),
    }
}

/// String-valued experiment parameters with typed accessors. Defaults are
/// supplied by the caller; parse failures are usage errors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    pub fn from_sources(file: &FileConfig, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (k, v) in &file.params {
            values.insert(k.clone(), value_to_string(v)?);
        }
        for (k, v) in overrides {
            values.insert(k.clone(), v.clone());
        }
        Ok(Self { values })
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => parse_one(key, s),
        }
    }

    /// Comma-separated list; brackets are ignored so `[1,2]` also works.
    pub fn list<T: FromStr + Clone>(&self, key: &str, default: &[T]) -> Result<Vec<T>, CliError>
    where
        T::Err: Display,
    {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(s) => {
                let items: Vec<&str> =
                    s.trim_matches(|c| c == '[' || c == ']').split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
                if items.is_empty() {
                    return Err(CliError::Usage(format!("parameter `{key}` must not be empty")));
                }
                items.into_iter().map(|x| parse_one(key, x)).collect()
            }
        }
    }

    pub fn execution(&self) -> Result<Execution, CliError> {
        match self.raw("execution").unwrap_or("parallel") {
            "parallel" => Ok(Execution::Parallel),
            "sequential" => Ok(Execution::Sequential),
            other => Err(CliError::Usage(format!("execution must be parallel or sequential, got `{other}`"))),
        }
    }
}

fn parse_one<T: FromStr>(key: &str, s: &str) -> Result<T, CliError>
where
    T::Err: Display,
{
    s.parse().map_err(|e| CliError::Usage(format!("parameter `{key}`: cannot parse `{s}`: {e}")))
}

/// Everything an experiment run needs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub id: String,
    pub params: Params,
    pub out: PathBuf,
    pub seed: u64,
    pub format: Format,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_overrides_file() {
        let file: FileConfig = toml::from_str("seed = 3\n[params]\nk = [1, 5]\neps = 0.5\n").unwrap();
        let p = Params::from_sources(&file, &[("eps".into(), "0.25".into())]).unwrap();
        assert_eq!(p.list::<u32>("k", &[]).unwrap(), vec![1, 5]);
        assert_eq!(p.get("eps", 0.0).unwrap(), 0.25);
        assert_eq!(p.get("missing", 9usize).unwrap(), 9);
        assert_eq!(file.seed, Some(3));
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let p = Params::from_sources(&FileConfig::default(), &[("k".into(), "x".into())]).unwrap();
        assert!(matches!(p.get::<f64>("k", 1.0), Err(CliError::Usage(_))));
        assert!(parse_override("novalue").is_err());
        assert_eq!(parse_override("a = b").unwrap(), ("a".into(), "b".into()));
    }

    #[test]
    fn unknown_file_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("sed = 3").is_err());
    }
}
