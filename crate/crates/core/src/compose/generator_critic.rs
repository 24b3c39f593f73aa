use crate::config::FlowConfig;
use crate::error::{ConfigError, FlowError, Role};
use crate::flow::{FlowBehavior, FlowOutput, FlowScope};
use crate::message::Message;
use crate::value::Value;

use super::mapping::{parse_max_rounds, KeyMapping, TerminationPredicate};
use super::{overlay, GENERATOR_CRITIC, ROUNDS_USED_KEY};

/// Default answer key and terminator used by LLM generators.
pub const DEFAULT_STOP_KEY: &str = "answer";
pub const DEFAULT_STOP_NEEDLE: &str = "Final answer.";

/// Generator proposes, critic reviews, feedback flows back to the generator.
///
/// Round r: the generator runs on the composite input overlaid with the
/// mapped feedback of round r-1. If `stop_on` holds on its output, or r is
/// the last allowed round, the loop ends and the critic is not called.
/// Otherwise the critic runs on the generator's input overlaid with the
/// generator's output, and `feedback_mapping` selects what the next
/// generator call sees. Hence with `r` rounds used there are `r` generator
/// calls and `r - 1` critic calls.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorCriticSpec {
    pub generator: FlowConfig,
    pub critic: FlowConfig,
    pub max_rounds: u32,
    pub stop_on: TerminationPredicate,
    pub feedback_mapping: KeyMapping,
}

impl GeneratorCriticSpec {
    pub fn new(generator: FlowConfig, critic: FlowConfig, max_rounds: u32) -> Self {
        GeneratorCriticSpec {
            generator,
            critic,
            max_rounds,
            stop_on: TerminationPredicate::contains(DEFAULT_STOP_KEY, DEFAULT_STOP_NEEDLE),
            feedback_mapping: KeyMapping::default(),
        }
    }

    pub fn stop_on(mut self, predicate: TerminationPredicate) -> Self {
        self.stop_on = predicate;
        self
    }

    pub fn feedback(mut self, mapping: KeyMapping) -> Self {
        self.feedback_mapping = mapping;
        self
    }

    pub fn into_config(self, name: &str) -> FlowConfig {
        let mut config = FlowConfig::new(name, GENERATOR_CRITIC);
        config.set_children(vec![self.generator, self.critic]);
        config.params.insert("max_rounds".into(), Value::from(self.max_rounds));
        config.params.insert("stop_on".into(), self.stop_on.to_value());
        config
            .params
            .insert("feedback_mapping".into(), self.feedback_mapping.to_value());
        config
    }
}

pub struct GeneratorCritic {
    max_rounds: u32,
    stop_on: TerminationPredicate,
    feedback_mapping: KeyMapping,
}

impl GeneratorCritic {
    pub fn from_config(config: &FlowConfig) -> Result<Self, ConfigError> {
        if config.children()?.len() != 2 {
            return Err(ConfigError::invalid(
                &config.name,
                "children",
                "expected exactly [generator, critic]",
            ));
        }
        let stop_on = match config.param("stop_on") {
            Some(v) => TerminationPredicate::parse(config, "stop_on", v)?,
            None => TerminationPredicate::contains(DEFAULT_STOP_KEY, DEFAULT_STOP_NEEDLE),
        };
        Ok(GeneratorCritic {
            max_rounds: parse_max_rounds(config)?,
            stop_on,
            feedback_mapping: KeyMapping::parse(config, "feedback_mapping", config.param("feedback_mapping"))?,
        })
    }
}

const GENERATOR: usize = 0;
const CRITIC: usize = 1;

impl FlowBehavior for GeneratorCritic {
    fn run(&self, scope: &mut FlowScope<'_>, input: &Message) -> Result<FlowOutput, FlowError> {
        let instance = scope.instance_id().clone();
        let flow = scope.name().to_string();
        let wrap = |role: Role, round: u32, source: FlowError| FlowError::Role {
            instance: instance.clone(),
            flow: flow.clone(),
            role,
            round,
            source: Box::new(source),
        };
        let mut generator_payload = input.payload().clone();
        let mut parents = vec![input.id().clone()];
        for round in 1..=self.max_rounds {
            let generator_input = scope.package(generator_payload.clone(), parents.clone())?;
            let proposal = scope
                .run_child(GENERATOR, &generator_input)
                .map_err(|e| wrap(Role::Generator, round, e))?;
            if self.stop_on.holds(proposal.payload()) || round == self.max_rounds {
                let mut payload = proposal.payload().clone();
                payload.insert(ROUNDS_USED_KEY.into(), Value::from(round));
                return Ok(FlowOutput {
                    payload,
                    parents: vec![proposal.id().clone()],
                });
            }
            let critic_input = scope.package(
                overlay(&generator_payload, proposal.payload()),
                vec![generator_input.id().clone(), proposal.id().clone()],
            )?;
            let review = scope
                .run_child(CRITIC, &critic_input)
                .map_err(|e| wrap(Role::Critic, round, e))?;
            let feedback = self
                .feedback_mapping
                .apply(review.payload())
                .map_err(|key| FlowError::MissingMappedKey {
                    instance: instance.clone(),
                    flow: flow.clone(),
                    key,
                })?;
            generator_payload = overlay(input.payload(), &feedback);
            parents = vec![input.id().clone(), review.id().clone()];
        }
        unreachable!("max_rounds >= 1 guarantees a return inside the loop")
    }
}
