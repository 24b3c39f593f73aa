//! The atomic flow around a chat-completion backend.
//!
//! The first call sends the system message and the rendered query message.
//! With `keep_history` (the default), the dialogue is stored in the flow's
//! state and every later call appends the rendered human message, so a
//! generator in a refinement loop sees its earlier attempts and the
//! feedback on them.

use crate::backend::{BackendRequest, ChatRole, ChatTurn, DEFAULT_MAX_TOKENS, DEFAULT_TEMPERATURE};
use crate::config::FlowConfig;
use crate::error::{ConfigError, FlowError};
use crate::flow::{FlowBehavior, FlowOutput, FlowScope};
use crate::message::Message;
use crate::registry::Registry;
use crate::template::{render_template, TemplateError};
use crate::value::{Payload, Value};

pub const LLM: &str = "llm";
const HISTORY_KEY: &str = "history";

pub(crate) fn register(registry: &mut Registry) {
    registry.register(LLM, |c| Ok(Box::new(LlmFlow::from_config(c)?)));
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    pub system_message: String,
    pub query_message: String,
    pub human_message: String,
}

#[derive(Debug, Clone)]
pub struct LlmFlow {
    pub prompts: PromptTemplate,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Constant template variables; input payload keys take precedence.
    pub partial_vars: Payload,
    pub keep_history: bool,
    pub output_key: String,
}

impl LlmFlow {
    pub fn from_config(config: &FlowConfig) -> Result<Self, ConfigError> {
        let text = |key: &str| config.text_param(key).map(|v| v.unwrap_or("").to_string());
        let prompts = PromptTemplate {
            system_message: text("system_message")?,
            query_message: config.required_text("query_message")?.to_string(),
            human_message: config.text_param("human_message")?.unwrap_or("{{query}}").to_string(),
        };
        let temperature = config.typed_param::<f64>("temperature")?.unwrap_or(DEFAULT_TEMPERATURE);
        if !(temperature.is_finite() && temperature >= 0.0) {
            return Err(ConfigError::invalid(&config.name, "temperature", "must be non-negative"));
        }
        let max_tokens = config.typed_param::<u32>("max_tokens")?.unwrap_or(DEFAULT_MAX_TOKENS);
        if max_tokens == 0 {
            return Err(ConfigError::invalid(&config.name, "max_tokens", "must be positive"));
        }
        let partial_vars = match config.param("partial_vars") {
            None => Payload::new(),
            Some(Value::Map(m)) => m.clone(),
            Some(_) => return Err(ConfigError::invalid(&config.name, "partial_vars", "expected a map")),
        };
        Ok(LlmFlow {
            prompts,
            model: config.text_param("model")?.unwrap_or("gpt-4").to_string(),
            temperature,
            max_tokens,
            partial_vars,
            keep_history: config.typed_param::<bool>("keep_history")?.unwrap_or(true),
            output_key: config.text_param("output_key")?.unwrap_or("answer").to_string(),
        })
    }

    fn render(&self, scope: &FlowScope<'_>, template: &str, input: &Message) -> Result<String, FlowError> {
        let mut vars = self.partial_vars.clone();
        vars.extend(input.payload().iter().map(|(k, v)| (k.clone(), v.clone())));
        render_template(template, &vars).map_err(|source: TemplateError| FlowError::Template {
            instance: scope.instance_id().clone(),
            flow: scope.name().to_string(),
            source,
        })
    }

    fn history(scope: &FlowScope<'_>) -> Result<Vec<ChatTurn>, FlowError> {
        match scope.state().get(HISTORY_KEY) {
            None => Ok(Vec::new()),
            Some(v) => v
                .to_deserializable()
                .map_err(|e| scope.fail(format!("corrupt dialogue history: {e}"))),
        }
    }

    /// Builds the next request, calls the backend, and updates the dialogue.
    pub fn respond(&self, scope: &mut FlowScope<'_>, input: &Message) -> Result<String, FlowError> {
        let history = if self.keep_history { Self::history(scope)? } else { Vec::new() };
        let mut turns = history;
        if turns.is_empty() {
            if !self.prompts.system_message.is_empty() {
                turns.push(ChatTurn::system(self.render(scope, &self.prompts.system_message, input)?));
            }
            turns.push(ChatTurn::user(self.render(scope, &self.prompts.query_message, input)?));
        } else {
            turns.push(ChatTurn::user(self.render(scope, &self.prompts.human_message, input)?));
        }
        let request = BackendRequest {
            model: self.model.clone(),
            turns,
            temperature: self.temperature,
            max_tokens: self.max_tokens,
        };
        let response = scope.complete(&request)?;
        if response.is_empty() {
            return Err(scope.fail("backend returned an empty completion"));
        }
        if self.keep_history {
            let mut turns = request.turns;
            turns.push(ChatTurn {
                role: ChatRole::Assistant,
                content: response.clone(),
            });
            scope.set_state(HISTORY_KEY, Value::from_serializable(&turns).expect("turns serialize"))?;
        }
        Ok(response)
    }
}

impl FlowBehavior for LlmFlow {
    fn run(&self, scope: &mut FlowScope<'_>, input: &Message) -> Result<FlowOutput, FlowError> {
        let response = self.respond(scope, input)?;
        let mut out = Payload::new();
        out.insert(self.output_key.clone(), Value::Text(response));
        Ok(out.into())
    }
}
