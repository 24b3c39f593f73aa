//! Tool backends behind LLM flows.

mod cache;
mod remote;
mod scripted;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::value::canonical_bytes;

pub use cache::{CacheEntry, CacheStats, ResponseCache};
pub use remote::{RemoteBackend, RemoteConfig};
pub use scripted::ScriptedBackend;

pub const DEFAULT_TEMPERATURE: f64 = 0.0;
pub const DEFAULT_MAX_TOKENS: u32 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatTurn {
    pub role: ChatRole,
    pub content: String,
}

impl ChatTurn {
    pub fn system(content: impl Into<String>) -> Self {
        ChatTurn {
            role: ChatRole::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatTurn {
            role: ChatRole::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatTurn {
            role: ChatRole::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendRequest {
    pub model: String,
    pub turns: Vec<ChatTurn>,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl BackendRequest {
    pub fn new(model: impl Into<String>, turns: Vec<ChatTurn>) -> Self {
        BackendRequest {
            model: model.into(),
            turns,
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        let invalid = |msg: &str| Err(BackendError::InvalidRequest(msg.to_string()));
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return invalid("temperature must be a non-negative number");
        }
        if self.max_tokens == 0 {
            return invalid("max_tokens must be positive");
        }
        for (i, turn) in self.turns.iter().enumerate() {
            match turn.role {
                ChatRole::System if i > 0 => return invalid("system turn must come first"),
                ChatRole::User | ChatRole::Assistant if turn.content.is_empty() => {
                    return invalid("user and assistant turns need content")
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Sorted-key compact JSON of model, turns, temperature and max_tokens.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        canonical_bytes(self)
    }

    /// Hex SHA-256 of the canonical serialization; the cache and replay key.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_bytes()))
    }

    pub fn system_text(&self) -> Option<&str> {
        self.turns
            .first()
            .filter(|t| t.role == ChatRole::System)
            .map(|t| t.content.as_str())
    }
}

#[derive(Debug, Clone, Error)]
pub enum BackendError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited: {0}")]
    RateLimited(String),
    #[error("transient failure: {0}")]
    Transient(String),
    #[error("malformed backend response: {0}")]
    Protocol(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted {
        attempts: u32,
        last: Box<BackendError>,
    },
    #[error("scripted response queue exhausted")]
    QueueExhausted,
    #[error("scripted responses for route `{0}` exhausted")]
    RouteExhausted(String),
    #[error("request {hash} not found in recorded responses (first message: {preview:?})")]
    UnknownRequest { hash: String, preview: String },
    #[error("backend configuration: {0}")]
    Config(String),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::RateLimited(_) | BackendError::Transient(_))
    }
}

/// A completion provider. Implementations must be safe to call from
/// several workers at once.
pub trait Backend: Send + Sync {
    fn complete(&self, request: &BackendRequest) -> Result<String, BackendError>;
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn complete(&self, request: &BackendRequest) -> Result<String, BackendError> {
        (**self).complete(request)
    }
}

/// Outcome of a cache-aware completion.
#[derive(Debug, Clone, PartialEq)]
pub struct CachedCompletion {
    pub text: String,
    pub hit: bool,
    /// Set when the cache could not be read or written; the call fell back to
    /// the backend.
    pub warning: Option<String>,
}

/// Serves from the cache when possible, otherwise completes and stores.
pub fn cached_complete(
    cache: &ResponseCache,
    backend: &dyn Backend,
    request: &BackendRequest,
) -> Result<CachedCompletion, BackendError> {
    let key = request.hash();
    let mut warning = None;
    match cache.get(&key) {
        Ok(Some(entry)) => {
            return Ok(CachedCompletion {
                text: entry.response,
                hit: true,
                warning: None,
            })
        }
        Ok(None) => {}
        Err(e) => warning = Some(format!("cache read failed: {e}")),
    }
    let text = backend.complete(request)?;
    if let Err(e) = cache.put(&key, &text) {
        warning = Some(format!("cache write failed: {e}"));
    }
    Ok(CachedCompletion {
        text,
        hit: false,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(temp: f64) -> BackendRequest {
        let mut r = BackendRequest::new("m", vec![ChatTurn::system("s"), ChatTurn::user("u")]);
        r.temperature = temp;
        r
    }

    #[test]
    fn canonical_form_sorts_keys() {
        let text = String::from_utf8(request(0.0).canonical_bytes()).unwrap();
        assert_eq!(
            text,
            r#"{"max_tokens":2048,"model":"m","temperature":0,"turns":[{"content":"s","role":"system"},{"content":"u","role":"user"}]}"#
        );
    }

    #[test]
    fn hash_is_sensitive_to_temperature() {
        assert_ne!(request(0.0).hash(), request(0.7).hash());
        assert_eq!(request(0.7).hash(), request(0.7).hash());
        assert_eq!(request(0.0).hash().len(), 64);
    }

    #[test]
    fn hash_ignores_source_key_order() {
        let a: BackendRequest = serde_json::from_str(
            r#"{"model":"m","turns":[{"role":"user","content":"u"}],"temperature":0.5,"max_tokens":5}"#,
        )
        .unwrap();
        let b: BackendRequest = serde_json::from_str(
            r#"{"max_tokens":5,"temperature":0.5,"turns":[{"content":"u","role":"user"}],"model":"m"}"#,
        )
        .unwrap();
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn validation_rules() {
        assert!(request(0.0).validate().is_ok());
        assert!(request(-1.0).validate().is_err());
        let late_system = BackendRequest::new("m", vec![ChatTurn::user("u"), ChatTurn::system("s")]);
        assert!(late_system.validate().is_err());
        let empty_user = BackendRequest::new("m", vec![ChatTurn::user("")]);
        assert!(empty_user.validate().is_err());
    }
}
