//! Trivial atomic flows.

use crate::config::FlowConfig;
use crate::error::{ConfigError, FlowError};
use crate::flow::{FlowBehavior, FlowOutput, FlowScope};
use crate::message::Message;
use crate::registry::Registry;
use crate::template::render_template;
use crate::value::{Payload, Value};

pub const FIXED_REPLY: &str = "fixed_reply";
pub const TRANSFORM: &str = "transform";
pub const SCRIPTED_REPLY: &str = "scripted_reply";

pub(crate) fn register(registry: &mut Registry) {
    registry.register(FIXED_REPLY, |c| Ok(Box::new(FixedReply::from_config(c)?)));
    registry.register(TRANSFORM, |c| Ok(Box::new(Transform::from_config(c)?)));
    registry.register(SCRIPTED_REPLY, |c| Ok(Box::new(ScriptedReply::from_config(c)?)));
}

/// Replies with configured text regardless of input. Params: `reply`
/// (text, sent verbatim), `output_key` (default `reply`).
pub struct FixedReply {
    reply: String,
    output_key: String,
}

impl FixedReply {
    pub fn from_config(config: &FlowConfig) -> Result<Self, ConfigError> {
        Ok(FixedReply {
            reply: config.required_text("reply")?.to_string(),
            output_key: config.text_param("output_key")?.unwrap_or("reply").to_string(),
        })
    }
}

impl FlowBehavior for FixedReply {
    fn run(&self, _scope: &mut FlowScope<'_>, _input: &Message) -> Result<FlowOutput, FlowError> {
        let mut out = Payload::new();
        out.insert(self.output_key.clone(), Value::Text(self.reply.clone()));
        Ok(out.into())
    }
}

/// Renders each output key from a template over the input payload.
/// Params: `outputs` (map from output key to template text).
pub struct Transform {
    outputs: Vec<(String, String)>,
}

impl Transform {
    pub fn from_config(config: &FlowConfig) -> Result<Self, ConfigError> {
        let map = config
            .param("outputs")
            .and_then(Value::as_map)
            .ok_or_else(|| ConfigError::invalid(&config.name, "outputs", "expected a map of templates"))?;
        let outputs = map
            .iter()
            .map(|(k, v)| {
                v.as_str()
                    .map(|t| (k.clone(), t.to_string()))
                    .ok_or_else(|| ConfigError::invalid(&config.name, &format!("outputs.{k}"), "expected text"))
            })
            .collect::<Result<_, _>>()?;
        Ok(Transform { outputs })
    }
}

impl FlowBehavior for Transform {
    fn run(&self, scope: &mut FlowScope<'_>, input: &Message) -> Result<FlowOutput, FlowError> {
        let mut out = Payload::new();
        for (key, template) in &self.outputs {
            let text = render_template(template, input.payload()).map_err(|source| FlowError::Template {
                instance: scope.instance_id().clone(),
                flow: scope.name().to_string(),
                source,
            })?;
            out.insert(key.clone(), Value::Text(text));
        }
        Ok(out.into())
    }
}

/// Emits the n-th configured payload on its n-th call (counter kept in
/// state). Params: `replies` (list of maps). Fails once the list is used up.
pub struct ScriptedReply {
    replies: Vec<Payload>,
}

impl ScriptedReply {
    pub fn from_config(config: &FlowConfig) -> Result<Self, ConfigError> {
        let list = config
            .param("replies")
            .and_then(Value::as_list)
            .ok_or_else(|| ConfigError::invalid(&config.name, "replies", "expected a list of maps"))?;
        let replies = list
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.as_map()
                    .cloned()
                    .ok_or_else(|| ConfigError::invalid(&config.name, &format!("replies[{i}]"), "expected a map"))
            })
            .collect::<Result<_, _>>()?;
        Ok(ScriptedReply { replies })
    }
}

impl FlowBehavior for ScriptedReply {
    fn run(&self, scope: &mut FlowScope<'_>, _input: &Message) -> Result<FlowOutput, FlowError> {
        let calls = scope.state().get("calls").and_then(Value::as_f64).unwrap_or(0.0) as usize;
        let reply = self
            .replies
            .get(calls)
            .cloned()
            .ok_or_else(|| scope.fail(format!("no scripted reply for call {}", calls + 1)))?;
        scope.set_state("calls", Value::from(calls + 1))?;
        Ok(reply.into())
    }
}
