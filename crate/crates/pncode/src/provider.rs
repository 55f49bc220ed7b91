//! Chat-completion providers: the offline keyword mock and an HTTP client for
//! OpenAI-style `/chat/completions` endpoints.

use std::fmt;
use std::time::Duration;

use pncode_core::prompting::{mock_complete, MockError, ProviderRequest, ProviderResponse, Usage};
use rand::Rng;
use serde_json::{json, Map, Value};
use thiserror::Error;

pub trait Provider: Send + Sync {
    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse, ProviderError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("provider configuration: {0}")]
    Config(String),
    #[error("authentication rejected (HTTP {status})")]
    Auth { status: u16 },
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32, retry_after: Option<Duration> },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("transport: {0}")]
    Transport(String),
    #[error("request timed out")]
    Timeout,
    #[error("invalid provider response: {0}")]
    InvalidResponse(String),
    #[error(transparent)]
    Mock(#[from] MockError),
}

/// Deterministic offline provider backed by keyword rules.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockProvider;

impl Provider for MockProvider {
    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        Ok(mock_complete(request)?)
    }
}

/// Transport retry schedule for 429 and 5xx replies. The delay before retry
/// `k` (0-based) is `min(cap, base * 2^k)` scaled by a random factor in
/// [0.5, 1]; a `Retry-After` header raises the delay, still bounded by `cap`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Backoff {
    pub max_retries: u32,
    pub base: Duration,
    pub cap: Duration,
}

impl Default for Backoff {
    fn default() -> Self {
        Backoff { max_retries: 4, base: Duration::from_millis(500), cap: Duration::from_secs(30) }
    }
}

impl Backoff {
    pub fn delay(&self, retry: u32, retry_after: Option<Duration>, rng: &mut impl Rng) -> Duration {
        let exp = self.base.saturating_mul(1u32.checked_shl(retry.min(31)).unwrap_or(u32::MAX)).min(self.cap);
        let jittered = exp.mul_f64(rng.random_range(0.5..=1.0));
        retry_after.map_or(jittered, |ra| ra.max(jittered)).min(self.cap)
    }
}

#[derive(Clone)]
pub struct HttpSettings {
    pub endpoint: String,
    pub api_key: String,
    pub timeout: Duration,
    pub backoff: Backoff,
}

impl fmt::Debug for HttpSettings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpSettings")
            .field("endpoint", &self.endpoint)
            .field("api_key", &"<redacted>")
            .field("timeout", &self.timeout)
            .field("backoff", &self.backoff)
            .finish()
    }
}

pub struct HttpProvider {
    settings: HttpSettings,
    agent: ureq::Agent,
}

impl fmt::Debug for HttpProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpProvider").field("settings", &self.settings).finish()
    }
}

const MAX_ERROR_BODY: usize = 500;

impl HttpProvider {
    pub fn new(settings: HttpSettings) -> Result<Self, ProviderError> {
        if settings.endpoint.trim().is_empty() {
            return Err(ProviderError::Config("endpoint is not set".into()));
        }
        if settings.api_key.trim().is_empty() {
            return Err(ProviderError::Config("API key is not set".into()));
        }
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(settings.timeout))
            .build()
            .into();
        Ok(HttpProvider { settings, agent })
    }

    fn attempt(&self, body: &str) -> Result<ProviderResponse, Attempt> {
        let result = self
            .agent
            .post(&self.settings.endpoint)
            .header("Authorization", &format!("Bearer {}", self.settings.api_key))
            .header("Content-Type", "application/json")
            .send(body);
        let mut response = match result {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => return Err(Attempt::Fatal(ProviderError::Timeout)),
            Err(e @ (ureq::Error::Io(_) | ureq::Error::ConnectionFailed | ureq::Error::HostNotFound)) => {
                return Err(Attempt::Retry { error: ProviderError::Transport(e.to_string()), retry_after: None })
            }
            Err(e) => return Err(Attempt::Fatal(ProviderError::Transport(e.to_string()))),
        };
        let status = response.status().as_u16();
        let retry_after = response
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        let text = match response.body_mut().read_to_string() {
            Ok(t) => t,
            Err(ureq::Error::Timeout(_)) => return Err(Attempt::Fatal(ProviderError::Timeout)),
            Err(e) => return Err(Attempt::Fatal(ProviderError::Transport(e.to_string()))),
        };
        match status {
            200..=299 => parse_completion(&text).map_err(Attempt::Fatal),
            401 | 403 => Err(Attempt::Fatal(ProviderError::Auth { status })),
            429 => Err(Attempt::Retry { error: ProviderError::RateLimited { attempts: 0, retry_after }, retry_after }),
            500..=599 => Err(Attempt::Retry { error: http_error(status, &text), retry_after }),
            _ => Err(Attempt::Fatal(http_error(status, &text))),
        }
    }
}

enum Attempt {
    Retry { error: ProviderError, retry_after: Option<Duration> },
    Fatal(ProviderError),
}

fn http_error(status: u16, body: &str) -> ProviderError {
    let body: String = body.chars().take(MAX_ERROR_BODY).collect();
    ProviderError::Http { status, body }
}

impl Provider for HttpProvider {
    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        let body = request_body(request).to_string();
        let mut rng = rand::rng();
        let mut retry = 0;
        loop {
            match self.attempt(&body) {
                Ok(r) => return Ok(r),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry { error, retry_after }) => {
                    if retry >= self.settings.backoff.max_retries {
                        return Err(match error {
                            ProviderError::RateLimited { retry_after, .. } => {
                                ProviderError::RateLimited { attempts: retry + 1, retry_after }
                            }
                            other => other,
                        });
                    }
                    std::thread::sleep(self.settings.backoff.delay(retry, retry_after, &mut rng));
                    retry += 1;
                }
            }
        }
    }
}

/// JSON body for a chat-completion call. Pass-through parameters are merged
/// in but cannot replace `model` or `messages`.
pub fn request_body(request: &ProviderRequest) -> Value {
    let mut body = Map::new();
    for (k, v) in &request.params {
        body.insert(k.clone(), v.clone());
    }
    body.insert("model".into(), json!(request.model_name));
    body.insert(
        "messages".into(),
        json!([
            {"role": "system", "content": request.system_prompt},
            {"role": "user", "content": request.user_prompt},
        ]),
    );
    Value::Object(body)
}

/// Reads `choices[0].message.content`, `finish_reason` and `usage` from a
/// chat-completion reply.
pub fn parse_completion(text: &str) -> Result<ProviderResponse, ProviderError> {
    let v: Value = serde_json::from_str(text).map_err(|e| ProviderError::InvalidResponse(e.to_string()))?;
    let choice = v
        .get("choices")
        .and_then(|c| c.get(0))
        .ok_or_else(|| ProviderError::InvalidResponse("no choices".into()))?;
    let content = choice
        .pointer("/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| ProviderError::InvalidResponse("choice has no text content".into()))?;
    let finish_reason = choice.get("finish_reason").and_then(Value::as_str).map(str::to_string);
    let usage = v.get("usage").map(|u| {
        let n = |k: &str| u.get(k).and_then(Value::as_u64).unwrap_or(0);
        Usage { prompt_tokens: n("prompt_tokens"), completion_tokens: n("completion_tokens"), total_tokens: n("total_tokens") }
    });
    Ok(ProviderResponse { content: content.to_string(), finish_reason, usage })
}
