//! Output files, resolved run configuration and exit-code mapping.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Everything needed to reproduce a run. Embedded in every output file.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub version: &'static str,
    pub seed: u64,
    /// `argument` or `entropy`.
    pub seed_origin: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_q_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub format: Option<Format>,
}

/// Writes tables into one directory.
///
/// CSV mode emits `stem.csv` plus a `stem.meta.json` sidecar; JSON mode emits
/// a single `stem.json` holding the metadata and the data.
pub struct Sink {
    dir: PathBuf,
    format: Format,
    config: RunConfig,
}

impl Sink {
    pub fn new(dir: &Path, format: Format, config: RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            config,
        })
    }

    pub fn write(&self, stem: &str, csv: &str, data: Value, details: Value) -> Result<(), CliError> {
        match self.format {
            Format::Csv => {
                self.put(&format!("{stem}.csv"), csv)?;
                let meta = json!({
                    "config": self.config,
                    "data_file": format!("{stem}.csv"),
                    "details": details,
                });
                self.put(&format!("{stem}.meta.json"), &pretty(&meta))
            }
            Format::Json => {
                let doc = json!({ "config": self.config, "details": details, "data": data });
                self.put(&format!("{stem}.json"), &pretty(&doc))
            }
        }
    }

    fn put(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        println!("{}", path.display());
        Ok(())
    }
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Debug)]
pub enum CliError {
    Lib {
        error: randcirc::Error,
        hint: Option<String>,
    },
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Io(format!("{}: {e}", path.display()))
    }

    /// Attaches `hint` to capacity errors only.
    pub fn with_capacity_hint(self, hint: impl Into<String>) -> Self {
        match self {
            Self::Lib {
                error: error @ randcirc::Error::Capacity { .. },
                ..
            } => Self::Lib {
                error,
                hint: Some(hint.into()),
            },
            other => other,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use randcirc::Error as E;
        match self {
            Self::Lib { error, .. } => match error {
                E::Capacity { .. } => 3,
                E::Numerical(_) => 4,
                _ => 2,
            },
            Self::Usage(_) => 2,
            Self::Io(_) => 1,
        }
    }
}

impl From<randcirc::Error> for CliError {
    fn from(error: randcirc::Error) -> Self {
        Self::Lib { error, hint: None }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Lib { error, hint } => {
                write!(f, "{error}")?;
                if let Some(h) = hint {
                    write!(f, "\nhint: {h}")?;
                }
                Ok(())
            }
            Self::Usage(m) => write!(f, "{m}"),
            Self::Io(m) => write!(f, "i/o failure: {m}"),
        }
    }
}
