//! TOML run configuration. Any value given as a command-line flag overrides
//! the file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<String>,
    pub stats: Option<String>,
    pub mode: Option<String>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub sims: Option<u64>,
    pub r: Option<Vec<usize>>,
    pub k: Option<u64>,
    pub kind: Option<String>,
    pub workers: Option<usize>,
    pub add_one: Option<bool>,
    pub out: Option<PathBuf>,
    pub alternative: Option<AlternativeConfig>,
}

/// Either a preset id or an explicit θ with its sample size.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlternativeConfig {
    /// `selection`, `inbreeding` or `null`
    pub model: Option<String>,
    pub preset: Option<u8>,
    pub theta: Option<Vec<f64>>,
    pub n: Option<u64>,
    pub w1: Option<f64>,
    /// Full fitness array in storage order (row by row, lower triangle).
    pub w: Option<Vec<f64>>,
    pub f: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let config: Self = toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        config.validate().with_context(|| format!("invalid config {}", path.display()))?;
        Ok(config)
    }

    fn validate(&self) -> anyhow::Result<()> {
        if self.trials == Some(0) {
            bail!("trials must be at least 1");
        }
        if self.sims == Some(0) {
            bail!("sims must be at least 1");
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                bail!("alpha must lie in (0, 1), got {a}");
            }
        }
        Ok(())
    }
}
