use crate::config::FlowConfig;
use crate::error::{ConfigError, FlowError};
use crate::flow::{FlowBehavior, FlowOutput, FlowScope};
use crate::message::Message;
use crate::value::Value;

use super::mapping::{parse_max_rounds, KeyMapping, TerminationPredicate};
use super::sequential::{parse_step_mappings, run_steps, StepState};
use super::{CIRCULAR, ROUNDS_USED_KEY};

/// Repeats the full step list until `exit` holds on a round's result or
/// `max_rounds` rounds have run. Mapping lookups and mapped keys carry over
/// between rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct CircularSpec {
    pub steps: Vec<(FlowConfig, KeyMapping)>,
    pub max_rounds: u32,
    pub exit: Option<TerminationPredicate>,
}

impl CircularSpec {
    pub fn into_config(self, name: &str) -> FlowConfig {
        let mut config = FlowConfig::new(name, CIRCULAR);
        let mappings = self.steps.iter().map(|(_, m)| m.to_value()).collect();
        config.set_children(self.steps.into_iter().map(|(c, _)| c).collect());
        config.params.insert("mappings".into(), Value::List(mappings));
        config.params.insert("max_rounds".into(), Value::from(self.max_rounds));
        if let Some(exit) = &self.exit {
            config.params.insert("exit".into(), exit.to_value());
        }
        config
    }
}

pub struct Circular {
    mappings: Vec<KeyMapping>,
    max_rounds: u32,
    exit: Option<TerminationPredicate>,
}

impl Circular {
    pub fn from_config(config: &FlowConfig) -> Result<Self, ConfigError> {
        Ok(Circular {
            mappings: parse_step_mappings(config)?,
            max_rounds: parse_max_rounds(config)?,
            exit: config
                .param("exit")
                .map(|v| TerminationPredicate::parse(config, "exit", v))
                .transpose()?,
        })
    }
}

impl FlowBehavior for Circular {
    fn run(&self, scope: &mut FlowScope<'_>, input: &Message) -> Result<FlowOutput, FlowError> {
        let instance = scope.instance_id().clone();
        let flow = scope.name().to_string();
        let mut state = StepState::new(input);
        let mut round = 0;
        loop {
            round += 1;
            let wrap = |step: usize, source: FlowError| FlowError::Round {
                instance: instance.clone(),
                flow: flow.clone(),
                round,
                step,
                source: Box::new(source),
            };
            let mut payload = run_steps(scope, input, &self.mappings, &mut state, &wrap)?;
            let done = self.exit.as_ref().is_some_and(|p| p.holds(&payload));
            if done || round >= self.max_rounds {
                payload.insert(ROUNDS_USED_KEY.into(), Value::from(round));
                return Ok(FlowOutput {
                    payload,
                    parents: state.last_id().into_iter().collect(),
                });
            }
        }
    }
}
