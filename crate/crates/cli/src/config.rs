//! JSON run configuration. Any field present in the file wins over the
//! corresponding command-line flag.

use std::path::Path;

use anyhow::{bail, Context, Result};
use fidmark_core::detector::Variant;
use fidmark_core::eval::BenchmarkMode;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SEED_ENV: &str = "FIDMARK_SEED";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub variant: Option<Variant>,
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub mode: Option<BenchmarkMode>,
    /// Partial detector parameters.
    pub detector: Option<Value>,
    /// Partial thresholds.
    pub thresholds: Option<Value>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Applies the keys of a partial JSON object on top of `base`.
pub fn overlay<T: Serialize + DeserializeOwned>(base: T, patch: Option<&Value>) -> Result<T> {
    let Some(patch) = patch else {
        return Ok(base);
    };
    let Value::Object(fields) = patch else {
        bail!("config section must be a JSON object, got {patch}");
    };
    let mut value = serde_json::to_value(base)?;
    let target = value.as_object_mut().expect("structs serialize to objects");
    for (k, v) in fields {
        if !target.contains_key(k) {
            bail!("unknown config key {k:?}");
        }
        target.insert(k.clone(), v.clone());
    }
    Ok(serde_json::from_value(value)?)
}

/// Seed from the environment, if set.
pub fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => Ok(Some(s.trim().parse().with_context(|| format!("{SEED_ENV}={s:?} is not an unsigned integer"))?)),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => bail!("{SEED_ENV}: {e}"),
    }
}
