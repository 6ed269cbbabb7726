//! TOML run configuration.
//!
//! ```toml
//! out_dir = "results"
//! format = "csv"
//! jobs = 4
//! strict = false
//!
//! [model]
//! source = "source.json"
//! rates = "rates.json"
//! i_sp = 2.5
//! accuracies = [0.88, 0.86, 0.81]
//!
//! [data]
//! manifest = "train.jsonl"
//!
//! [sweep]
//! start = 1.0
//! stop = 50.0
//! step = 1.0
//!
//! [overlap]
//! bin_width = 5.0
//!
//! [fit]
//! kl_bins = 50
//! ```
//!
//! Relative paths resolve against the config file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

use crate::output::Format;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out_dir: Option<PathBuf>,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
    pub strict: Option<bool>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub overlap: OverlapConfig,
    #[serde(default)]
    pub fit: FitConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub source: Option<PathBuf>,
    pub rates: Option<PathBuf>,
    pub i_sp: Option<f64>,
    pub accuracies: Option<[f64; 3]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapConfig {
    pub bin_width: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub kl_bins: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut config: FileConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut config.out_dir,
            &mut config.model.source,
            &mut config.model.rates,
            &mut config.data.manifest,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }
}
