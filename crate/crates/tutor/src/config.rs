//! Service configuration. Precedence: environment > file > defaults.
//!
//! ```toml
//! listen = "127.0.0.1:8080"
//! exercises = "exercises"
//! log = "events.jsonl"
//! snapshots = "snapshots"        # optional
//! snapshot_interval_secs = 30
//! language = "en"
//!
//! [search]
//! max_length = 2
//! candidate_cap = 50000
//! ```
//!
//! Environment variables: `LOGIC_TUTOR_LISTEN`, `LOGIC_TUTOR_EXERCISES`,
//! `LOGIC_TUTOR_LOG`, `LOGIC_TUTOR_SNAPSHOTS`, `LOGIC_TUTOR_LANGUAGE`,
//! `LOGIC_TUTOR_MAX_LENGTH`, `LOGIC_TUTOR_CANDIDATE_CAP`.

use std::path::{Path, PathBuf};

use logic_tutor_core::feedback::{SearchLimits, DEFAULT_CANDIDATE_CAP, DEFAULT_MAX_LENGTH};
use serde::{Deserialize, Serialize};

use crate::messages::Language;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub listen: String,
    pub exercises: PathBuf,
    pub log: PathBuf,
    pub snapshots: Option<PathBuf>,
    pub snapshot_interval_secs: u64,
    pub language: Language,
    pub search: SearchConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub max_length: usize,
    pub candidate_cap: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            listen: "127.0.0.1:8080".into(),
            exercises: "exercises".into(),
            log: "events.jsonl".into(),
            snapshots: None,
            snapshot_interval_secs: 30,
            language: Language::En,
            search: SearchConfig::default(),
        }
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { max_length: DEFAULT_MAX_LENGTH, candidate_cap: DEFAULT_CANDIDATE_CAP }
    }
}

impl SearchConfig {
    pub fn limits(&self) -> SearchLimits {
        SearchLimits { max_length: self.max_length, candidate_cap: self.candidate_cap }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("environment variable {name}: {message}")]
    Env { name: &'static str, message: String },
}

impl Config {
    /// Reads `file` if given and applies overrides from `env`, a lookup such
    /// as `|name| std::env::var(name).ok()`.
    pub fn load(file: Option<&Path>, env: impl Fn(&str) -> Option<String>) -> Result<Config, ConfigError> {
        let mut config = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
                toml::from_str(&text).map_err(|source| ConfigError::Parse { path: path.to_path_buf(), source })?
            }
            None => Config::default(),
        };
        if let Some(v) = env("LOGIC_TUTOR_LISTEN") {
            config.listen = v;
        }
        if let Some(v) = env("LOGIC_TUTOR_EXERCISES") {
            config.exercises = v.into();
        }
        if let Some(v) = env("LOGIC_TUTOR_LOG") {
            config.log = v.into();
        }
        if let Some(v) = env("LOGIC_TUTOR_SNAPSHOTS") {
            config.snapshots = Some(v.into());
        }
        if let Some(v) = env("LOGIC_TUTOR_LANGUAGE") {
            config.language =
                v.parse().map_err(|message| ConfigError::Env { name: "LOGIC_TUTOR_LANGUAGE", message })?;
        }
        if let Some(v) = env("LOGIC_TUTOR_MAX_LENGTH") {
            config.search.max_length = number("LOGIC_TUTOR_MAX_LENGTH", &v)?;
        }
        if let Some(v) = env("LOGIC_TUTOR_CANDIDATE_CAP") {
            config.search.candidate_cap = number("LOGIC_TUTOR_CANDIDATE_CAP", &v)?;
        }
        Ok(config)
    }
}

fn number(name: &'static str, value: &str) -> Result<usize, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::Env { name, message: format!("`{value}` is not a number") })
}
