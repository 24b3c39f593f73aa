//! Flow instances, their isolated state, and the run contract.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::backend::{cached_complete, Backend, BackendRequest, ResponseCache};
use crate::config::FlowConfig;
use crate::error::{ConfigError, FlowError};
use crate::message::{package_input, InstanceId, Message, MessageId};
use crate::registry::Registry;
use crate::trace::{EventKind, TraceSink};
use crate::value::{Payload, Value};
use crate::payload;

/// Local store of one flow instance. Only the owning instance can write it.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    owner: InstanceId,
    store: Payload,
}

impl FlowState {
    fn new(owner: InstanceId) -> Self {
        FlowState {
            owner,
            store: Payload::new(),
        }
    }

    pub fn owner(&self) -> &InstanceId {
        &self.owner
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.store.get(key)
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }
}

/// Everything a run needs besides the flow tree itself.
#[derive(Clone)]
pub struct RunContext {
    registry: Arc<Registry>,
    trace: Arc<TraceSink>,
    backend: Option<Arc<dyn Backend>>,
    cache: Option<Arc<ResponseCache>>,
}

impl RunContext {
    pub fn new(registry: Arc<Registry>, trace: Arc<TraceSink>) -> Self {
        RunContext {
            registry,
            trace,
            backend: None,
            cache: None,
        }
    }

    pub fn with_backend(mut self, backend: Arc<dyn Backend>) -> Self {
        self.backend = Some(backend);
        self
    }

    pub fn with_cache(mut self, cache: Arc<ResponseCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn trace(&self) -> &TraceSink {
        &self.trace
    }

    pub fn record(&self, instance: &InstanceId, kind: EventKind, body: Payload) -> Result<(), FlowError> {
        Ok(self.trace.record(instance, kind, body)?)
    }

    /// Completes a request through the cache (when configured), recording the
    /// call and its response in the trace.
    pub fn complete(
        &self,
        instance: &InstanceId,
        flow: &str,
        request: &BackendRequest,
    ) -> Result<String, FlowError> {
        let backend_err = |source| FlowError::Backend {
            instance: instance.clone(),
            flow: flow.to_string(),
            source,
        };
        let backend = self.backend.as_ref().ok_or_else(|| {
            backend_err(crate::backend::BackendError::Config("no backend configured".into()))
        })?;
        request.validate().map_err(backend_err)?;
        let hash = request.hash();
        let request_value = Value::from_serializable(request).expect("requests serialize");
        self.record(
            instance,
            EventKind::BackendCall,
            payload! {"hash" => hash.as_str(), "request" => request_value},
        )?;
        let (text, cached) = match &self.cache {
            Some(cache) => {
                let out = cached_complete(cache, backend.as_ref(), request).map_err(backend_err)?;
                if let Some(warning) = out.warning {
                    self.record(instance, EventKind::Warning, payload! {"message" => warning})?;
                }
                (out.text, out.hit)
            }
            None => (backend.complete(request).map_err(backend_err)?, false),
        };
        self.record(
            instance,
            EventKind::BackendResponse,
            payload! {"hash" => hash, "response" => text.as_str(), "cached" => cached},
        )?;
        Ok(text)
    }
}

/// What a flow behavior returns: the output payload plus any message ids
/// (besides the input) the output derives from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowOutput {
    pub payload: Payload,
    pub parents: Vec<MessageId>,
}

impl From<Payload> for FlowOutput {
    fn from(payload: Payload) -> Self {
        FlowOutput {
            payload,
            parents: Vec::new(),
        }
    }
}

/// The kind-specific part of a flow. Behaviors hold only immutable,
/// config-derived data; anything that changes between runs lives in
/// [`FlowState`].
pub trait FlowBehavior: Send + Sync {
    fn run(&self, scope: &mut FlowScope<'_>, input: &Message) -> Result<FlowOutput, FlowError>;
}

/// A behavior's view of its own instance during one run.
pub struct FlowScope<'a> {
    ctx: &'a RunContext,
    instance_id: &'a InstanceId,
    config: &'a FlowConfig,
    state: &'a mut FlowState,
    children: &'a mut Vec<FlowInstance>,
}

impl<'a> FlowScope<'a> {
    pub fn ctx(&self) -> &RunContext {
        self.ctx
    }

    pub fn instance_id(&self) -> &InstanceId {
        self.instance_id
    }

    pub fn config(&self) -> &FlowConfig {
        self.config
    }

    pub fn name(&self) -> &str {
        &self.config.name
    }

    pub fn state(&self) -> &FlowState {
        self.state
    }

    pub fn set_state(&mut self, key: &str, value: Value) -> Result<(), FlowError> {
        self.ctx.record(
            self.instance_id,
            EventKind::StateUpdate,
            payload! {"key" => key, "value" => value.clone()},
        )?;
        self.state.store.insert(key.to_string(), value);
        Ok(())
    }

    pub fn child_count(&self) -> usize {
        self.children.len()
    }

    pub fn child_name(&self, index: usize) -> Option<&str> {
        self.children.get(index).map(|c| c.config.name.as_str())
    }

    pub fn run_child(&mut self, index: usize, input: &Message) -> Result<Message, FlowError> {
        let child = self.children.get_mut(index).ok_or_else(|| FlowError::Failed {
            instance: self.instance_id.clone(),
            flow: self.config.name.clone(),
            message: format!("no child at index {index}"),
        })?;
        child.run(self.ctx, input)
    }

    /// Instantiates a new child at run time; returns its index.
    pub fn spawn_child(&mut self, config: &FlowConfig) -> Result<usize, FlowError> {
        let child = self.ctx.registry().create_flow(config)?;
        self.children.push(child);
        Ok(self.children.len() - 1)
    }

    /// Packages a message authored by this instance.
    pub fn package(&self, payload: Payload, parents: Vec<MessageId>) -> Result<Message, FlowError> {
        package_input(payload, self.instance_id, parents)
    }

    pub fn complete(&self, request: &BackendRequest) -> Result<String, FlowError> {
        self.ctx.complete(self.instance_id, &self.config.name, request)
    }

    pub fn fail(&self, message: impl Into<String>) -> FlowError {
        FlowError::Failed {
            instance: self.instance_id.clone(),
            flow: self.config.name.clone(),
            message: message.into(),
        }
    }

    pub fn environment_error(&self, message: impl Into<String>) -> FlowError {
        FlowError::Environment {
            instance: self.instance_id.clone(),
            flow: self.config.name.clone(),
            message: message.into(),
        }
    }
}

/// A live flow: configuration, private state, and owned children.
pub struct FlowInstance {
    id: InstanceId,
    config: FlowConfig,
    state: FlowState,
    children: Vec<FlowInstance>,
    behavior: Box<dyn FlowBehavior>,
}

impl std::fmt::Debug for FlowInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FlowInstance")
            .field("id", &self.id)
            .field("name", &self.config.name)
            .field("kind", &self.config.kind)
            .field("children", &self.children)
            .finish()
    }
}

impl FlowInstance {
    pub(crate) fn assemble(
        config: FlowConfig,
        behavior: Box<dyn FlowBehavior>,
        children: Vec<FlowInstance>,
    ) -> Self {
        let id = InstanceId::fresh();
        FlowInstance {
            state: FlowState::new(id.clone()),
            id,
            config,
            children,
            behavior,
        }
    }

    pub fn id(&self) -> &InstanceId {
        &self.id
    }

    pub fn config(&self) -> &FlowConfig {
        &self.config
    }

    pub fn name(&self) -> &str {
        &self.config.name
    }

    pub fn children(&self) -> &[FlowInstance] {
        &self.children
    }

    /// Read-only copy of this instance's state, for inspection by callers
    /// outside the flow tree.
    pub fn state_snapshot(&self) -> Payload {
        self.state.store.clone()
    }

    /// Snapshots of every state in this tree, keyed by instance id.
    pub fn tree_snapshot(&self) -> BTreeMap<InstanceId, Payload> {
        let mut out = BTreeMap::new();
        self.collect_states(&mut out);
        out
    }

    fn collect_states(&self, out: &mut BTreeMap<InstanceId, Payload>) {
        out.insert(self.id.clone(), self.state.store.clone());
        for child in &self.children {
            child.collect_states(out);
        }
    }

    /// Clears this instance's state and, recursively, its children's.
    pub fn reset_state(&mut self) {
        self.state.store.clear();
        for child in &mut self.children {
            child.reset_state();
        }
    }

    /// Packages `payload` as an external input and runs the flow on it. The
    /// flow's configuration is recorded with its `flow_start` event so the
    /// run can be replayed from the trace alone.
    pub fn run_root(&mut self, ctx: &RunContext, payload: Payload) -> Result<Message, FlowError> {
        let input = package_input(payload, &InstanceId::from("external"), Vec::new())?;
        self.run_inner(ctx, &input, true)
    }

    pub fn run(&mut self, ctx: &RunContext, input: &Message) -> Result<Message, FlowError> {
        self.run_inner(ctx, input, false)
    }

    fn run_inner(&mut self, ctx: &RunContext, input: &Message, root: bool) -> Result<Message, FlowError> {
        let mut start = payload! {"name" => self.config.name.as_str(), "kind" => self.config.kind.as_str()};
        if root {
            start.insert("config".into(), self.config.to_value());
        }
        ctx.record(&self.id, EventKind::FlowStart, start)?;
        ctx.record(&self.id, EventKind::MessageIn, message_body(input))?;
        let result = self.execute(ctx, input);
        let status = match &result {
            Ok(_) => payload! {"status" => "ok"},
            Err(e) => payload! {"status" => "error", "error" => e.to_string()},
        };
        if let Ok(output) = &result {
            ctx.record(&self.id, EventKind::MessageOut, message_body(output))?;
        }
        ctx.record(&self.id, EventKind::FlowEnd, status)?;
        result
    }

    fn execute(&mut self, ctx: &RunContext, input: &Message) -> Result<Message, FlowError> {
        let missing: Vec<String> = self
            .config
            .input_keys
            .iter()
            .filter(|k| !input.payload().contains_key(*k))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(FlowError::MissingInputKeys {
                instance: self.id.clone(),
                flow: self.config.name.clone(),
                keys: missing,
            });
        }
        let mut scope = FlowScope {
            ctx,
            instance_id: &self.id,
            config: &self.config,
            state: &mut self.state,
            children: &mut self.children,
        };
        let output = self.behavior.run(&mut scope, input)?;
        let missing: Vec<String> = self
            .config
            .output_keys
            .iter()
            .filter(|k| !output.payload.contains_key(*k))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(FlowError::MissingOutputKeys {
                instance: self.id.clone(),
                flow: self.config.name.clone(),
                keys: missing,
            });
        }
        let mut parents = vec![input.id().clone()];
        for p in output.parents {
            if !parents.contains(&p) {
                parents.push(p);
            }
        }
        package_input(output.payload, &self.id, parents)
    }
}

fn message_body(message: &Message) -> Payload {
    payload! {"message" => Value::from_serializable(message).expect("messages serialize")}
}

/// Convenience: instantiate from a registry.
pub fn create_flow(registry: &Registry, config: &FlowConfig) -> Result<FlowInstance, ConfigError> {
    registry.create_flow(config)
}
