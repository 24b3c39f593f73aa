#![allow(dead_code)]

use std::sync::Arc;

use flows_core::atomic::{FIXED_REPLY, SCRIPTED_REPLY};
use flows_core::{
    Backend, FlowConfig, FlowError, FlowInstance, Message, Payload, Registry, RunContext, TraceEvent,
    TraceSink, Value,
};

pub fn fixed(name: &str, reply: &str) -> FlowConfig {
    FlowConfig::new(name, FIXED_REPLY).with_param("reply", reply)
}

pub fn fixed_as(name: &str, key: &str, reply: &str) -> FlowConfig {
    fixed(name, reply).with_param("output_key", key)
}

pub fn scripted(name: &str, replies: Vec<Payload>) -> FlowConfig {
    FlowConfig::new(name, SCRIPTED_REPLY)
        .with_param("replies", Value::List(replies.into_iter().map(Value::Map).collect()))
}

pub fn context(backend: Option<Arc<dyn Backend>>) -> RunContext {
    let ctx = RunContext::new(Arc::new(Registry::with_builtins()), Arc::new(TraceSink::memory()));
    match backend {
        Some(b) => ctx.with_backend(b),
        None => ctx,
    }
}

pub fn instantiate(config: &FlowConfig) -> FlowInstance {
    Registry::with_builtins().create_flow(config).expect("valid config")
}

pub struct Outcome {
    pub result: Result<Message, FlowError>,
    pub events: Vec<TraceEvent>,
}

pub fn run_once(config: &FlowConfig, payload: Payload, backend: Option<Arc<dyn Backend>>) -> Outcome {
    let ctx = context(backend);
    let mut flow = instantiate(config);
    let result = flow.run_root(&ctx, payload);
    Outcome {
        result,
        events: ctx.trace().events(),
    }
}
