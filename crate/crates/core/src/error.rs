use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::backend::BackendError;
use crate::message::InstanceId;
use crate::template::TemplateError;
use crate::trace::TraceError;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown flow kind `{0}`")]
    UnknownKind(String),
    #[error("flow config name must be non-empty")]
    EmptyName,
    #[error("flow `{flow}`: invalid `{field}`: {reason}")]
    InvalidParam {
        flow: String,
        field: String,
        reason: String,
    },
    #[error("flow `{flow}`: duplicate key `{key}` in `{field}`")]
    DuplicateKey {
        flow: String,
        field: String,
        key: String,
    },
    #[error("flow `{flow}`: key `{key}` is reserved (underscore prefix)")]
    ReservedKey { flow: String, key: String },
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl ConfigError {
    pub fn invalid(flow: &str, field: &str, reason: impl fmt::Display) -> Self {
        ConfigError::InvalidParam {
            flow: flow.to_string(),
            field: field.to_string(),
            reason: reason.to_string(),
        }
    }
}

/// Which side of a generator-critic loop failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Generator,
    Critic,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Generator => f.write_str("generator"),
            Role::Critic => f.write_str("critic"),
        }
    }
}

/// A structured flow failure. Every variant produced while running a flow
/// carries the instance that originated it.
#[derive(Debug, Error)]
pub enum FlowError {
    #[error("payload keys must be non-empty")]
    EmptyPayloadKey,
    #[error("flow `{flow}` ({instance}): missing input keys {keys:?}")]
    MissingInputKeys {
        instance: InstanceId,
        flow: String,
        keys: Vec<String>,
    },
    #[error("flow `{flow}` ({instance}): output lacks promised keys {keys:?}")]
    MissingOutputKeys {
        instance: InstanceId,
        flow: String,
        keys: Vec<String>,
    },
    #[error("flow `{flow}` ({instance}): mapped key `{key}` not produced by any earlier step")]
    MissingMappedKey {
        instance: InstanceId,
        flow: String,
        key: String,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("flow `{flow}` ({instance}): {source}")]
    Template {
        instance: InstanceId,
        flow: String,
        source: TemplateError,
    },
    #[error("flow `{flow}` ({instance}): backend: {source}")]
    Backend {
        instance: InstanceId,
        flow: String,
        source: BackendError,
    },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("flow `{flow}` step {index} failed: {source}")]
    Step {
        instance: InstanceId,
        flow: String,
        index: usize,
        source: Box<FlowError>,
    },
    #[error("flow `{flow}` round {round} step {step} failed: {source}")]
    Round {
        instance: InstanceId,
        flow: String,
        round: u32,
        step: usize,
        source: Box<FlowError>,
    },
    #[error("flow `{flow}` {role} failed in round {round}: {source}")]
    Role {
        instance: InstanceId,
        flow: String,
        role: Role,
        round: u32,
        source: Box<FlowError>,
    },
    #[error("flow `{flow}` ({instance}): {message}")]
    Failed {
        instance: InstanceId,
        flow: String,
        message: String,
    },
    #[error("flow `{flow}` ({instance}): environment error: {message}")]
    Environment {
        instance: InstanceId,
        flow: String,
        message: String,
    },
}

impl FlowError {
    /// The innermost error in a chain of composite failures.
    pub fn root_cause(&self) -> &FlowError {
        match self {
            FlowError::Step { source, .. }
            | FlowError::Round { source, .. }
            | FlowError::Role { source, .. } => source.root_cause(),
            other => other,
        }
    }

    /// The instance where the failure originated, if known.
    pub fn origin(&self) -> Option<&InstanceId> {
        match self.root_cause() {
            FlowError::MissingInputKeys { instance, .. }
            | FlowError::MissingOutputKeys { instance, .. }
            | FlowError::MissingMappedKey { instance, .. }
            | FlowError::Template { instance, .. }
            | FlowError::Backend { instance, .. }
            | FlowError::Failed { instance, .. }
            | FlowError::Environment { instance, .. } => Some(instance),
            _ => None,
        }
    }

    /// True when the failure comes from the host environment (missing
    /// interpreter, unwritable trace) rather than from the flow's logic.
    pub fn is_environment(&self) -> bool {
        matches!(
            self.root_cause(),
            FlowError::Environment { .. } | FlowError::Trace(_)
        )
    }
}
