//! Flat `key = value` run configuration.
//!
//! A config is either a flat TOML file (scalars, or arrays joined with `,`)
//! or a manifest JSON written by a previous run, whose `params` object is
//! read back. Later sources win: command defaults, then the file, then each
//! `--set`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use gaqed_core::params::SystemParams;

use crate::CliError;

/// Merged key/value view of one run.
#[derive(Debug, Clone, Default)]
pub struct Config {
    pub values: BTreeMap<String, String>,
    /// Run keys as resolved by the `take_*` calls, for the manifest.
    pub resolved: BTreeMap<String, String>,
}

impl Config {
    pub fn with_defaults(defaults: &[(&str, &str)]) -> Self {
        Config {
            values: defaults
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            resolved: BTreeMap::new(),
        }
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let pairs = if path.extension().is_some_and(|e| e == "json") {
            manifest_pairs(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        } else {
            toml_pairs(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        };
        self.values.extend(pairs);
        Ok(())
    }

    pub fn apply_sets(&mut self, sets: &[String]) -> Result<(), CliError> {
        for s in sets {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{s}`")))?;
            self.values
                .insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(())
    }

    /// Removes a run key, parsed with its default.
    pub fn take<T: std::str::FromStr + ToString>(
        &mut self,
        key: &str,
        default: T,
    ) -> Result<T, CliError> {
        let v = match self.values.remove(key) {
            None => default,
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Config(format!("invalid value `{v}` for `{key}`")))?,
        };
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn take_f64(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        let v: f64 = self.take(key, default)?;
        if !v.is_finite() {
            return Err(CliError::Config(format!("`{key}` must be finite")));
        }
        Ok(v)
    }

    pub fn take_list(&mut self, key: &str, default: &[i64]) -> Result<Vec<i64>, CliError> {
        let list = match self.values.remove(key) {
            None => default.to_vec(),
            Some(v) if v.trim().is_empty() => Vec::new(),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| CliError::Config(format!("invalid site `{s}` in `{key}`")))
                })
                .collect::<Result<_, _>>()?,
        };
        self.resolved.insert(
            key.to_string(),
            list.iter()
                .map(i64::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
        Ok(list)
    }

    /// Remaining keys as physics parameters, and the full resolved
    /// parameter set.
    pub fn into_params(
        self,
        horizon: f64,
    ) -> Result<(SystemParams, BTreeMap<String, String>), CliError> {
        let p = SystemParams::from_pairs(self.values, horizon)?;
        let mut all = self.resolved;
        all.extend(p.to_pairs().into_iter().map(|(k, v)| (k.to_string(), v)));
        Ok((p, all))
    }
}

fn toml_pairs(text: &str) -> Result<Vec<(String, String)>, String> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| e.message().to_string())?;
    table
        .into_iter()
        .map(|(k, v)| Ok((k.clone(), scalar(&k, &v)?)))
        .collect()
}

fn scalar(key: &str, v: &toml::Value) -> Result<String, String> {
    use toml::Value;
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Integer(i) => i.to_string(),
        Value::Float(f) => f.to_string(),
        Value::Boolean(b) => b.to_string(),
        Value::Array(a) => a
            .iter()
            .map(|x| scalar(key, x))
            .collect::<Result<Vec<_>, _>>()?
            .join(","),
        _ => return Err(format!("`{key}` must be a scalar or an array of scalars")),
    })
}

fn manifest_pairs(text: &str) -> Result<Vec<(String, String)>, String> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let params = v
        .get("params")
        .and_then(|p| p.as_object())
        .ok_or("manifest has no `params` object")?;
    params
        .iter()
        .map(|(k, v)| {
            v.as_str()
                .map(|s| (k.clone(), s.to_string()))
                .ok_or_else(|| format!("`{k}` is not a string"))
        })
        .collect()
}
