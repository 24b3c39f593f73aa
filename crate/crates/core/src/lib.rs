//! Compositional flows: message-passing units that wrap LLM calls, tools
//! or other flows, plus the backends and traces that drive them.

pub mod atomic;
pub mod backend;
pub mod compose;
pub mod config;
pub mod error;
pub mod flow;
pub mod llm;
pub mod message;
pub mod registry;
pub mod template;
pub mod trace;
pub mod value;

pub use backend::{Backend, BackendError, BackendRequest, ChatRole, ChatTurn, ScriptedBackend};
pub use config::FlowConfig;
pub use error::{ConfigError, FlowError, Role};
pub use flow::{create_flow, FlowBehavior, FlowInstance, FlowOutput, FlowScope, FlowState, RunContext};
pub use message::{package_input, InstanceId, Message, MessageId};
pub use registry::Registry;
pub use template::{render_template, TemplateError};
pub use trace::{EventKind, TraceEvent, TraceSink};
pub use value::{Payload, Value};
