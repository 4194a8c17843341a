//! Optional TOML configuration and data-file lookup.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

pub const DATA_ENV: &str = "TILING_DATA_DIR";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub data_dir: Option<PathBuf>,
    pub core_fraction: Option<String>,
    pub radius: Option<String>,
    #[serde(default)]
    pub palette: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config, CliError> {
        let Some(path) = path else { return Ok(Config::default()) };
        let text = read(path)?;
        toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.display().to_string(),
            msg: e.message().to_string(),
        })
    }

    /// `TILING_DATA_DIR`, then the config file, then the source tree.
    pub fn data_dir(&self) -> PathBuf {
        if let Some(d) = std::env::var_os(DATA_ENV).filter(|d| !d.is_empty()) {
            return PathBuf::from(d);
        }
        if let Some(d) = &self.data_dir {
            return d.clone();
        }
        PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"))
    }

    /// An input path as given if it exists, otherwise the same name in the
    /// data directory.
    pub fn locate(&self, path: &Path) -> PathBuf {
        if path.exists() || path.is_absolute() {
            return path.to_path_buf();
        }
        let dir = self.data_dir();
        let direct = dir.join(path);
        if direct.exists() {
            return direct;
        }
        match path.file_name() {
            Some(name) if dir.join(name).exists() => dir.join(name),
            _ => path.to_path_buf(),
        }
    }

    /// Rules file for a rule set referenced by name from a patch.
    pub fn rules_for(&self, name: &str) -> PathBuf {
        self.data_dir().join(format!("{name}.rules"))
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })
}
