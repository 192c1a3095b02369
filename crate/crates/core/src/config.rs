//! Optional TOML configuration. Flags win over the file; the cache location
//! can also come from `ISOSLOPE_CACHE`.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

pub const CACHE_ENV: &str = "ISOSLOPE_CACHE";
pub const DEFAULT_CACHE: &str = "isoslope-traces.jsonl";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub cache: Option<PathBuf>,
    /// `"exact"` or `"complex"`.
    pub backend: Option<String>,
    /// Primes scanned by `dwork scan` when `--p` is absent.
    pub primes: Option<Vec<u64>>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.into(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.into(),
            source,
        })
    }

    /// Flag, then `ISOSLOPE_CACHE`, then the config file, then [`DEFAULT_CACHE`].
    pub fn cache_path(&self, flag: Option<&Path>, env: Option<&str>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| env.filter(|s| !s.is_empty()).map(PathBuf::from))
            .or_else(|| self.cache.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE))
    }
}
