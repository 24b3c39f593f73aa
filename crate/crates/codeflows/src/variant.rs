//! The flow variants and their wiring.

use std::fmt;
use std::str::FromStr;

use flows_core::atomic::{FIXED_REPLY, TRANSFORM};
use flows_core::compose::{GeneratorCriticSpec, KeyMapping, SequentialSpec, TerminationPredicate};
use flows_core::llm::LLM;
use flows_core::{payload, FlowConfig, Value};
use thiserror::Error;

use crate::kinds::{
    PlanMode, ANSWER_KEY, CODER, CODE_KEY, ORACLE_PLAN, PLANNER, PLAN_KEY, SUMMARY_KEY, VERDICT_KEY,
};
use crate::prompts::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlanPart {
    Plan,
    PlanReflection,
    PlanCollaboration,
    PlanOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CodePart {
    Code,
    CodeReflection,
    CodeCollaboration,
    CodeDebug,
    CodeDebugCollab,
}

impl PlanPart {
    pub const ALL: [PlanPart; 4] = [
        PlanPart::Plan,
        PlanPart::PlanReflection,
        PlanPart::PlanCollaboration,
        PlanPart::PlanOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlanPart::Plan => "Plan",
            PlanPart::PlanReflection => "Plan_Reflection",
            PlanPart::PlanCollaboration => "Plan_Collaboration",
            PlanPart::PlanOracle => "Plan_Oracle",
        }
    }
}

impl CodePart {
    pub const ALL: [CodePart; 5] = [
        CodePart::Code,
        CodePart::CodeReflection,
        CodePart::CodeCollaboration,
        CodePart::CodeDebug,
        CodePart::CodeDebugCollab,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CodePart::Code => "Code",
            CodePart::CodeReflection => "Code_Reflection",
            CodePart::CodeCollaboration => "Code_Collaboration",
            CodePart::CodeDebug => "Code_Debug",
            CodePart::CodeDebugCollab => "Code_Debug_Collab",
        }
    }

    pub fn uses_tests(self) -> bool {
        matches!(self, CodePart::CodeDebug | CodePart::CodeDebugCollab)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowVariant {
    pub plan: Option<PlanPart>,
    pub code: CodePart,
}

impl FlowVariant {
    pub const fn new(plan: Option<PlanPart>, code: CodePart) -> Self {
        FlowVariant { plan, code }
    }

    /// The nine variants evaluated by default.
    pub const SUITE: [FlowVariant; 9] = [
        FlowVariant::new(None, CodePart::Code),
        FlowVariant::new(None, CodePart::CodeReflection),
        FlowVariant::new(None, CodePart::CodeCollaboration),
        FlowVariant::new(None, CodePart::CodeDebug),
        FlowVariant::new(None, CodePart::CodeDebugCollab),
        FlowVariant::new(Some(PlanPart::Plan), CodePart::Code),
        FlowVariant::new(Some(PlanPart::PlanReflection), CodePart::Code),
        FlowVariant::new(Some(PlanPart::PlanCollaboration), CodePart::Code),
        FlowVariant::new(Some(PlanPart::PlanOracle), CodePart::Code),
    ];

    pub const BASELINE: FlowVariant = FlowVariant::new(None, CodePart::Code);

    /// Every name the grammar admits.
    pub fn all() -> Vec<FlowVariant> {
        let mut out: Vec<FlowVariant> = CodePart::ALL.iter().map(|c| FlowVariant::new(None, *c)).collect();
        for plan in PlanPart::ALL {
            out.extend(CodePart::ALL.iter().map(|c| FlowVariant::new(Some(plan), *c)));
        }
        out
    }

    pub fn display_name(&self) -> String {
        match self.plan {
            None => self.code.name().to_string(),
            Some(plan) => format!("{}-{}", plan.name(), self.code.name()),
        }
    }
}

impl fmt::Display for FlowVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown flow variant `{name}`")]
pub struct UnknownVariant {
    pub name: String,
}

impl UnknownVariant {
    /// The closest valid name, if any is reasonably close.
    pub fn suggestion(&self) -> Option<String> {
        FlowVariant::all()
            .into_iter()
            .map(|v| v.display_name())
            .map(|n| (strsim::levenshtein(&self.name, &n), n))
            .filter(|(d, n)| *d <= 3.max(n.len() / 3))
            .min()
            .map(|(_, n)| n)
    }
}

impl FromStr for FlowVariant {
    type Err = UnknownVariant;

    fn from_str(name: &str) -> Result<Self, Self::Err> {
        let unknown = || UnknownVariant { name: name.to_string() };
        let code_of = |s: &str| CodePart::ALL.into_iter().find(|c| c.name() == s);
        if let Some(code) = code_of(name) {
            return Ok(FlowVariant::new(None, code));
        }
        let (plan, code) = name.split_once('-').ok_or_else(unknown)?;
        let plan = PlanPart::ALL.into_iter().find(|p| p.name() == plan).ok_or_else(unknown)?;
        let code = code_of(code).ok_or_else(unknown)?;
        Ok(FlowVariant::new(Some(plan), code))
    }
}

pub const DEFAULT_MAX_ROUNDS: u32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct VariantSettings {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub max_rounds: u32,
    pub plan_mode: PlanMode,
}

impl Default for VariantSettings {
    fn default() -> Self {
        VariantSettings {
            model: "gpt-4".into(),
            temperature: flows_core::backend::DEFAULT_TEMPERATURE,
            max_tokens: flows_core::backend::DEFAULT_MAX_TOKENS,
            max_rounds: DEFAULT_MAX_ROUNDS,
            plan_mode: PlanMode::Dataset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("max_rounds must be at least 1")]
    NoRounds,
    #[error("max_tokens must be positive")]
    NoTokens,
    #[error("temperature must be a non-negative number")]
    BadTemperature,
}

/// Flow names used across variants; call counts in traces are keyed by them.
pub mod names {
    pub const CODE_GENERATOR: &str = "code_generator";
    pub const CODE_CRITIC: &str = "code_critic";
    pub const CODE_FLOW: &str = "code_flow";
    pub const CODER_STEP: &str = "coder";
    pub const CODE_TESTER: &str = "code_tester";
    pub const PLAN_GENERATOR: &str = "plan_generator";
    pub const PLAN_CRITIC: &str = "plan_critic";
    pub const PLAN_FLOW: &str = "plan_flow";
    pub const PLAN_ORACLE: &str = "plan_oracle";
}

fn llm(name: &str, kind: &str, system: &str, query: &str, human: &str, settings: &VariantSettings) -> FlowConfig {
    FlowConfig::new(name, kind)
        .with_param("system_message", system)
        .with_param("query_message", query)
        .with_param("human_message", human)
        .with_param("model", settings.model.as_str())
        .with_param("temperature", settings.temperature)
        .with_param("max_tokens", settings.max_tokens)
        .with_param(
            "partial_vars",
            Value::Map(payload! {"code_placeholder" => CODE_PLACEHOLDER, "plan_placeholder" => PLAN_PLACEHOLDER}),
        )
}

fn critic_llm(name: &str, system: &str, query: &str, output_key: &str, settings: &VariantSettings) -> FlowConfig {
    llm(name, LLM, system, query, "{{query}}", settings)
        .with_param("keep_history", false)
        .with_param("output_key", output_key)
}

fn fixed_reply(name: &str, reply: &str, output_key: &str) -> FlowConfig {
    FlowConfig::new(name, FIXED_REPLY)
        .with_param("reply", reply)
        .with_param("output_key", output_key)
}

fn generator_critic(
    generator: FlowConfig,
    critic: FlowConfig,
    feedback: (&str, &str),
    settings: &VariantSettings,
) -> GeneratorCriticSpec {
    GeneratorCriticSpec::new(generator, critic, settings.max_rounds).feedback(KeyMapping::new([feedback]))
}

fn code_part(part: CodePart, with_plan: bool, settings: &VariantSettings) -> FlowConfig {
    use names::*;
    let query = if with_plan {
        format!("{CODE_QUERY}{PLAN_SECTION}")
    } else {
        CODE_QUERY.to_string()
    };
    let coder = |name: &str, human: &str| llm(name, CODER, CODE_SYSTEM, &query, human, settings);
    let tested = |human: &str| {
        SequentialSpec::new()
            .step(coder(CODER_STEP, human), KeyMapping::default())
            .step(
                FlowConfig::new(CODE_TESTER, crate::kinds::CODE_TESTER),
                KeyMapping::identity([CODE_KEY, ANSWER_KEY]),
            )
            .into_config(CODE_GENERATOR)
    };
    let on_all_passed = TerminationPredicate::equals(VERDICT_KEY, "AllPassed");
    match part {
        CodePart::Code => coder(CODE_GENERATOR, CODE_HUMAN),
        CodePart::CodeReflection => generator_critic(
            coder(CODE_GENERATOR, CODE_HUMAN),
            fixed_reply(CODE_CRITIC, CODE_REFLECTION_REPLY, "reflection"),
            ("reflection", "query"),
            settings,
        )
        .into_config(CODE_FLOW),
        CodePart::CodeCollaboration => generator_critic(
            coder(CODE_GENERATOR, CODE_COLLAB_HUMAN),
            critic_llm(CODE_CRITIC, CODE_CRITIC_SYSTEM, CODE_CRITIC_QUERY, "critique", settings),
            ("critique", "code_feedback"),
            settings,
        )
        .into_config(CODE_FLOW),
        CodePart::CodeDebug => generator_critic(
            tested(CODE_DEBUG_HUMAN),
            FlowConfig::new(CODE_CRITIC, TRANSFORM).with_param(
                "outputs",
                Value::Map(payload! {SUMMARY_KEY => "{{testing_results_summary}}"}),
            ),
            (SUMMARY_KEY, SUMMARY_KEY),
            settings,
        )
        .stop_on(on_all_passed)
        .into_config(CODE_FLOW),
        CodePart::CodeDebugCollab => generator_critic(
            tested(CODE_COLLAB_HUMAN),
            critic_llm(CODE_CRITIC, DEBUG_CRITIC_SYSTEM, DEBUG_CRITIC_QUERY, "critique", settings),
            ("critique", "code_feedback"),
            settings,
        )
        .stop_on(on_all_passed)
        .into_config(CODE_FLOW),
    }
}

fn plan_part(part: PlanPart, settings: &VariantSettings) -> FlowConfig {
    use names::*;
    let planner = |human: &str| llm(PLAN_GENERATOR, PLANNER, PLAN_SYSTEM, PLAN_QUERY, human, settings);
    match part {
        PlanPart::Plan => planner("{{query}}"),
        PlanPart::PlanReflection => generator_critic(
            planner("{{query}}"),
            fixed_reply(PLAN_CRITIC, PLAN_REFLECTION_REPLY, "reflection"),
            ("reflection", "query"),
            settings,
        )
        .into_config(PLAN_FLOW),
        PlanPart::PlanCollaboration => generator_critic(
            planner(PLAN_COLLAB_HUMAN),
            critic_llm(PLAN_CRITIC, PLAN_CRITIC_SYSTEM, PLAN_CRITIC_QUERY, "critique", settings),
            ("critique", "plan_feedback"),
            settings,
        )
        .into_config(PLAN_FLOW),
        PlanPart::PlanOracle => FlowConfig::new(PLAN_ORACLE, ORACLE_PLAN).with_param("mode", settings.plan_mode.as_str()),
    }
}

/// The flow configuration for a variant: a sequential root named after the
/// variant, holding the optional plan part and the code part.
pub fn build_variant(variant: FlowVariant, settings: &VariantSettings) -> Result<FlowConfig, BuildError> {
    if settings.max_rounds == 0 {
        return Err(BuildError::NoRounds);
    }
    if settings.max_tokens == 0 {
        return Err(BuildError::NoTokens);
    }
    if !(settings.temperature.is_finite() && settings.temperature >= 0.0) {
        return Err(BuildError::BadTemperature);
    }
    let code = code_part(variant.code, variant.plan.is_some(), settings);
    let spec = match variant.plan {
        None => SequentialSpec::new().step(code, KeyMapping::default()),
        Some(plan) => SequentialSpec::new()
            .step(plan_part(plan, settings), KeyMapping::default())
            .step(code, KeyMapping::identity([PLAN_KEY])),
    };
    Ok(spec.into_config(&variant.display_name()))
}
