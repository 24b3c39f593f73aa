use crate::config::FlowConfig;
use crate::error::{ConfigError, FlowError};
use crate::flow::{FlowBehavior, FlowOutput, FlowScope};
use crate::message::{Message, MessageId};
use crate::value::{Payload, Value};

use super::mapping::KeyMapping;
use super::{overlay, SEQUENTIAL};

/// Steps run once each, in order. Each step's mapping pulls keys from the
/// composite input and the outputs of earlier steps (later outputs shadow
/// earlier ones); mapped keys accumulate and are overlaid on the composite
/// input to form every later step's input. The result is the accumulated
/// mapped keys overlaid with the last step's output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SequentialSpec {
    pub steps: Vec<(FlowConfig, KeyMapping)>,
}

impl SequentialSpec {
    pub fn new() -> Self {
        SequentialSpec::default()
    }

    pub fn step(mut self, config: FlowConfig, mapping: KeyMapping) -> Self {
        self.steps.push((config, mapping));
        self
    }

    pub fn into_config(self, name: &str) -> FlowConfig {
        let mut config = FlowConfig::new(name, SEQUENTIAL);
        let mappings = self.steps.iter().map(|(_, m)| m.to_value()).collect();
        config.set_children(self.steps.into_iter().map(|(c, _)| c).collect());
        config.params.insert("mappings".into(), Value::List(mappings));
        config
    }
}

pub(crate) fn parse_step_mappings(config: &FlowConfig) -> Result<Vec<KeyMapping>, ConfigError> {
    let children = config.children()?;
    if children.is_empty() {
        return Err(ConfigError::invalid(&config.name, "children", "at least one step is required"));
    }
    let listed = match config.param("mappings") {
        None => Vec::new(),
        Some(Value::List(items)) => items.clone(),
        Some(_) => return Err(ConfigError::invalid(&config.name, "mappings", "expected a list")),
    };
    if listed.len() > children.len() {
        return Err(ConfigError::invalid(&config.name, "mappings", "more mappings than steps"));
    }
    (0..children.len())
        .map(|i| KeyMapping::parse(config, &format!("mappings[{i}]"), listed.get(i)))
        .collect()
}

/// Carry-over between steps (and, for circular flows, between rounds).
#[derive(Default)]
pub(crate) struct StepState {
    lookup: Payload,
    carried: Payload,
    last: Option<Message>,
}

impl StepState {
    pub(crate) fn new(input: &Message) -> Self {
        StepState {
            lookup: input.payload().clone(),
            carried: Payload::new(),
            last: None,
        }
    }

    pub(crate) fn last_id(&self) -> Option<MessageId> {
        self.last.as_ref().map(|m| m.id().clone())
    }
}

/// Runs every step once. `wrap` attaches location context to child failures.
pub(crate) fn run_steps(
    scope: &mut FlowScope<'_>,
    input: &Message,
    mappings: &[KeyMapping],
    state: &mut StepState,
    wrap: &dyn Fn(usize, FlowError) -> FlowError,
) -> Result<Payload, FlowError> {
    for (index, mapping) in mappings.iter().enumerate() {
        let mapped = mapping.apply(&state.lookup).map_err(|key| FlowError::MissingMappedKey {
            instance: scope.instance_id().clone(),
            flow: scope.name().to_string(),
            key,
        })?;
        state.carried.extend(mapped);
        let mut parents = vec![input.id().clone()];
        parents.extend(state.last_id());
        let child_input = scope.package(overlay(input.payload(), &state.carried), parents)?;
        let output = scope
            .run_child(index, &child_input)
            .map_err(|e| wrap(index, e))?;
        state
            .lookup
            .extend(output.payload().iter().map(|(k, v)| (k.clone(), v.clone())));
        state.last = Some(output);
    }
    let last = state.last.as_ref().expect("at least one step");
    Ok(overlay(&state.carried, last.payload()))
}

pub struct Sequential {
    mappings: Vec<KeyMapping>,
}

impl Sequential {
    pub fn from_config(config: &FlowConfig) -> Result<Self, ConfigError> {
        Ok(Sequential {
            mappings: parse_step_mappings(config)?,
        })
    }
}

impl FlowBehavior for Sequential {
    fn run(&self, scope: &mut FlowScope<'_>, input: &Message) -> Result<FlowOutput, FlowError> {
        let instance = scope.instance_id().clone();
        let flow = scope.name().to_string();
        let wrap = |index: usize, source: FlowError| FlowError::Step {
            instance: instance.clone(),
            flow: flow.clone(),
            index,
            source: Box::new(source),
        };
        let mut state = StepState::new(input);
        let payload = run_steps(scope, input, &self.mappings, &mut state, &wrap)?;
        Ok(FlowOutput {
            payload,
            parents: state.last_id().into_iter().collect(),
        })
    }
}
