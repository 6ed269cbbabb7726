use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}

/// Where a command's result goes, plus what to record in the run sidecar.
pub struct Sink {
    pub path: Option<PathBuf>,
    pub meta: RunMeta,
}

#[derive(Debug, Serialize)]
pub struct RunMeta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub argv: Vec<String>,
    pub config: Option<String>,
    pub inputs: Vec<String>,
    pub unix_time: u64,
}

impl RunMeta {
    pub fn new(command: &'static str, config: Option<&Path>) -> Self {
        RunMeta {
            tool: "mcnn",
            version: env!("CARGO_PKG_VERSION"),
            command,
            argv: std::env::args().collect(),
            config: config.map(|p| p.display().to_string()),
            inputs: Vec::new(),
            unix_time: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }
}

/// `<file>.meta.json` next to a result file.
pub fn meta_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

pub fn write_meta(path: &Path, meta: &RunMeta) -> Result<()> {
    let target = meta_path(path);
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    fs::write(&target, text).with_context(|| format!("writing {}", target.display()))
}

impl Sink {
    /// Writes the payload to the output file (and its run sidecar) or to
    /// stdout.
    pub fn emit(&self, payload: &[u8]) -> Result<()> {
        match &self.path {
            Some(path) => {
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir)
                        .with_context(|| format!("creating {}", dir.display()))?;
                }
                fs::write(path, payload).with_context(|| format!("writing {}", path.display()))?;
                write_meta(path, &self.meta)
            }
            None => {
                let mut out = io::stdout().lock();
                out.write_all(payload)?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Left-aligned key column, right-aligned values.
pub fn key_value_text(rows: &[(&str, String)]) -> Vec<u8> {
    let mut out = String::new();
    for (k, v) in rows {
        out.push_str(&format!("{k:<20}{v:>24}\n"));
    }
    out.into_bytes()
}
