//! Run configuration: a TOML file, environment variables and command-line
//! flags, resolved with the precedence flags > file > environment > defaults.
//!
//! ```toml
//! [provider]
//! endpoint = "https://api.example.com/v1/chat/completions"
//! model = "gpt-4o"
//! api_key = "..."          # or PNCODE_API_KEY
//! timeout_secs = 120
//! max_retries = 4          # transport retries on 429/5xx
//! backoff_base_ms = 500
//! backoff_cap_ms = 30000
//!
//! [chain]
//! runs = 3
//! max_retries_per_stage = 2
//! concurrency_limit = 4
//!
//! [params]                 # passed to the provider as-is
//! temperature = 0.0
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::chain::ChainConfig;
use crate::provider::{Backoff, HttpSettings, ProviderError};

pub const ENV_API_KEY: &str = "PNCODE_API_KEY";
pub const ENV_ENDPOINT: &str = "PNCODE_ENDPOINT";
pub const ENV_MODEL: &str = "PNCODE_MODEL";
/// Config file read when no path is given, if it exists.
pub const DEFAULT_CONFIG_PATH: &str = "pncode.toml";
pub const MOCK_MODEL: &str = "mock";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config {path}: {source}")]
    Parse { path: String, source: toml::de::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderSection {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub api_key: Option<String>,
    pub timeout_secs: Option<u64>,
    pub max_retries: Option<u32>,
    pub backoff_base_ms: Option<u64>,
    pub backoff_cap_ms: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub runs: Option<usize>,
    pub max_retries_per_stage: Option<u32>,
    pub concurrency_limit: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub provider: ProviderSection,
    #[serde(default)]
    pub chain: ChainSection,
    #[serde(default)]
    pub params: BTreeMap<String, toml::Value>,
}

impl ConfigFile {
    pub fn parse(source: &str, path: &str) -> Result<Self, ConfigError> {
        toml::from_str(source).map_err(|source| ConfigError::Parse { path: path.to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: shown.clone(), source })?;
        Self::parse(&text, &shown)
    }

    /// Loads `explicit` if given, else [`DEFAULT_CONFIG_PATH`] when present.
    pub fn discover(explicit: Option<&Path>) -> Result<Option<(Self, String)>, ConfigError> {
        let path = match explicit {
            Some(p) => p,
            None if Path::new(DEFAULT_CONFIG_PATH).is_file() => Path::new(DEFAULT_CONFIG_PATH),
            None => return Ok(None),
        };
        Ok(Some((Self::load(path)?, path.display().to_string())))
    }
}

/// Values given on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub model: Option<String>,
    pub endpoint: Option<String>,
    pub runs: Option<usize>,
    pub max_retries_per_stage: Option<u32>,
    pub concurrency_limit: Option<usize>,
    pub mock: bool,
    pub timestamps: bool,
}

#[derive(Clone, PartialEq)]
pub struct Resolved {
    pub chain: ChainConfig,
    pub endpoint: Option<String>,
    pub api_key: Option<String>,
    pub backoff: Backoff,
    pub mock: bool,
}

impl std::fmt::Debug for Resolved {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Resolved({})", self.snapshot())
    }
}

impl Resolved {
    /// Settings for the HTTP provider; fails when endpoint or key is missing.
    pub fn http_settings(&self) -> Result<HttpSettings, ProviderError> {
        match (&self.endpoint, &self.api_key) {
            (Some(endpoint), Some(api_key)) => Ok(HttpSettings {
                endpoint: endpoint.clone(),
                api_key: api_key.clone(),
                timeout: self.chain.request_timeout,
                backoff: self.backoff,
            }),
            (endpoint, key) => {
                let mut missing = Vec::new();
                if endpoint.is_none() {
                    missing.push(format!("endpoint ([provider].endpoint or {ENV_ENDPOINT})"));
                }
                if key.is_none() {
                    missing.push(format!("API key ([provider].api_key or {ENV_API_KEY})"));
                }
                Err(ProviderError::Config(format!("missing {}", missing.join(" and "))))
            }
        }
    }

    /// The configuration as recorded in run manifests. The API key is
    /// reported only as present or absent.
    pub fn snapshot(&self) -> Value {
        json!({
            "mock": self.mock,
            "model_name": self.chain.model_name,
            "endpoint": self.endpoint,
            "api_key": if self.api_key.is_some() { "<redacted>" } else { "<unset>" },
            "runs": self.chain.runs,
            "max_retries_per_stage": self.chain.max_retries_per_stage,
            "concurrency_limit": self.chain.concurrency_limit,
            "request_timeout_secs": self.chain.request_timeout.as_secs_f64(),
            "transport_retries": self.backoff.max_retries,
            "backoff_base_ms": self.backoff.base.as_millis() as u64,
            "backoff_cap_ms": self.backoff.cap.as_millis() as u64,
            "params": self.chain.params,
        })
    }
}

fn non_empty(v: Option<String>) -> Option<String> {
    v.filter(|s| !s.trim().is_empty())
}

/// Combines flags, the config file and the environment (looked up through
/// `env`) over built-in defaults.
pub fn resolve(
    flags: &Overrides,
    file: Option<&ConfigFile>,
    env: impl Fn(&str) -> Option<String>,
) -> Result<Resolved, ConfigError> {
    let empty = ConfigFile::default();
    let file = file.unwrap_or(&empty);
    let p = &file.provider;

    let model = non_empty(flags.model.clone())
        .or_else(|| non_empty(p.model.clone()))
        .or_else(|| non_empty(env(ENV_MODEL)))
        .or_else(|| flags.mock.then(|| MOCK_MODEL.to_string()))
        .ok_or_else(|| ConfigError::Invalid(format!("no model: pass --model, set [provider].model or {ENV_MODEL}")))?;

    let mut chain = ChainConfig::new(model);
    chain.timestamps = flags.timestamps;
    if let Some(v) = flags.runs.or(file.chain.runs) {
        chain.runs = v;
    }
    if let Some(v) = flags.max_retries_per_stage.or(file.chain.max_retries_per_stage) {
        chain.max_retries_per_stage = v;
    }
    if let Some(v) = flags.concurrency_limit.or(file.chain.concurrency_limit) {
        chain.concurrency_limit = v;
    }
    if let Some(secs) = p.timeout_secs {
        chain.request_timeout = Duration::from_secs(secs);
    }
    for (k, v) in &file.params {
        let v = serde_json::to_value(v).map_err(|e| ConfigError::Invalid(format!("params.{k}: {e}")))?;
        chain.params.insert(k.clone(), v);
    }
    chain.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;

    let mut backoff = Backoff::default();
    if let Some(v) = p.max_retries {
        backoff.max_retries = v;
    }
    if let Some(v) = p.backoff_base_ms {
        backoff.base = Duration::from_millis(v);
    }
    if let Some(v) = p.backoff_cap_ms {
        backoff.cap = Duration::from_millis(v);
    }

    Ok(Resolved {
        chain,
        endpoint: non_empty(flags.endpoint.clone())
            .or_else(|| non_empty(p.endpoint.clone()))
            .or_else(|| non_empty(env(ENV_ENDPOINT))),
        api_key: non_empty(p.api_key.clone()).or_else(|| non_empty(env(ENV_API_KEY))),
        backoff,
        mock: flags.mock,
    })
}
