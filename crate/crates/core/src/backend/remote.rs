//! HTTP chat-completions client with exponential backoff.

use std::time::Duration;

use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Backend, BackendError, BackendRequest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteConfig {
    pub endpoint: String,
    /// Name of the environment variable holding the API key.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_base_delay_ms")]
    pub base_delay_ms: u64,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_attempts() -> u32 {
    5
}

fn default_base_delay_ms() -> u64 {
    500
}

fn default_timeout_secs() -> u64 {
    120
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteConfig {
            endpoint: endpoint.into(),
            api_key_env: None,
            max_attempts: default_attempts(),
            base_delay_ms: default_base_delay_ms(),
            timeout_secs: default_timeout_secs(),
        }
    }
}

pub struct RemoteBackend {
    config: RemoteConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

impl RemoteBackend {
    /// Reads the credential from the configured environment variable.
    pub fn new(config: RemoteConfig) -> Result<Self, BackendError> {
        let api_key = match &config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                BackendError::Config(format!("environment variable `{var}` is not set"))
            })?),
            None => None,
        };
        if config.max_attempts == 0 {
            return Err(BackendError::Config("max_attempts must be at least 1".into()));
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(RemoteBackend {
            config,
            api_key,
            agent,
        })
    }

    fn attempt(&self, request: &BackendRequest) -> Result<String, BackendError> {
        let body = json!({
            "model": request.model,
            "messages": request.turns,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "n": 1,
        });
        let mut call = self.agent.post(&self.config.endpoint);
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = call
            .send_json(&body)
            .map_err(|e| BackendError::Transient(e.to_string()))?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| BackendError::Transient(e.to_string()))?;
        match status {
            200..=299 => {}
            401 | 403 => return Err(BackendError::Auth(format!("HTTP {status}: {text}"))),
            408 | 429 => return Err(BackendError::RateLimited(format!("HTTP {status}"))),
            500..=599 => return Err(BackendError::Transient(format!("HTTP {status}"))),
            _ => return Err(BackendError::Protocol(format!("HTTP {status}: {text}"))),
        }
        let parsed: CompletionResponse =
            serde_json::from_str(&text).map_err(|e| BackendError::Protocol(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| BackendError::Protocol("response has no completion".into()))
    }
}

impl Backend for RemoteBackend {
    fn complete(&self, request: &BackendRequest) -> Result<String, BackendError> {
        request.validate()?;
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.attempt(request) {
                Ok(text) => return Ok(text),
                Err(e) if e.is_retryable() && attempt < self.config.max_attempts => {
                    let delay = self.config.base_delay_ms.saturating_mul(1 << (attempt - 1).min(16));
                    warn!("backend attempt {attempt} failed ({e}); retrying in {delay} ms");
                    std::thread::sleep(Duration::from_millis(delay));
                }
                Err(e) if e.is_retryable() => {
                    return Err(BackendError::RetriesExhausted {
                        attempts: attempt,
                        last: Box::new(e),
                    })
                }
                Err(e) => return Err(e),
            }
        }
    }
}
