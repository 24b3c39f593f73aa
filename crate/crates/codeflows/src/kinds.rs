//! Flow kinds specific to competitive coding: the coder and planner LLM
//! flows, the public-test runner, and the oracle plan source.

use std::io::{self, BufRead, Write};
use std::sync::{Arc, Mutex};

use flows_core::llm::LlmFlow;
use flows_core::{
    ConfigError, FlowBehavior, FlowConfig, FlowError, FlowOutput, FlowScope, Message, Payload, Registry, Value,
};
use flows_sandbox::{CandidateProgram, ExecutionLimits, Sandbox, TestCase};

use crate::extract::{detect_final_answer, extract_code, extract_plan, PLAN_HEADER};
use crate::problem_vars::{HUMAN_PLAN_KEY, PUBLIC_TESTS_KEY};

pub const CODER: &str = "coder";
pub const PLANNER: &str = "planner";
pub const CODE_TESTER: &str = "code_tester";
pub const ORACLE_PLAN: &str = "oracle_plan";

pub const CODE_KEY: &str = "code";
pub const PLAN_KEY: &str = "plan";
pub const ANSWER_KEY: &str = "answer";
pub const SUMMARY_KEY: &str = "testing_results_summary";
pub const VERDICT_KEY: &str = "public_verdict";

/// Marker line that ends an interactively typed plan.
pub const END_OF_PLAN: &str = "<EOF>";

/// Source of human-written plans in interactive mode.
pub trait PlanConsole: Send + Sync {
    fn read_plan(&self, statement: &str) -> io::Result<String>;
}

/// Writes the statement to `out` and reads lines from `input` until the
/// end marker or end of input.
pub struct StreamConsole<R, W> {
    streams: Mutex<(R, W)>,
}

impl<R: BufRead + Send, W: Write + Send> StreamConsole<R, W> {
    pub fn new(input: R, out: W) -> Self {
        StreamConsole {
            streams: Mutex::new((input, out)),
        }
    }
}

impl<R: BufRead + Send, W: Write + Send> PlanConsole for StreamConsole<R, W> {
    fn read_plan(&self, statement: &str) -> io::Result<String> {
        let mut guard = self.streams.lock().unwrap_or_else(|p| p.into_inner());
        let (input, out) = &mut *guard;
        writeln!(out, "{statement}\n\nType the plan, then a line containing {END_OF_PLAN}:")?;
        out.flush()?;
        let mut lines = Vec::new();
        for line in input.lines() {
            let line = line?;
            if line.trim_end() == END_OF_PLAN {
                break;
            }
            lines.push(line);
        }
        Ok(lines.join("\n").trim().to_string())
    }
}

/// Shared services the kinds need at run time.
#[derive(Clone)]
pub struct CcEnv {
    pub sandbox: Arc<Sandbox>,
    pub limits: ExecutionLimits,
    pub console: Option<Arc<dyn PlanConsole>>,
}

impl Default for CcEnv {
    fn default() -> Self {
        CcEnv {
            sandbox: Arc::new(Sandbox::default()),
            limits: ExecutionLimits::default(),
            console: None,
        }
    }
}

/// Registers the built-in kinds plus the competitive-coding ones.
pub fn registry(env: &CcEnv) -> Registry {
    let mut registry = Registry::with_builtins();
    register(&mut registry, env);
    registry
}

pub fn register(registry: &mut Registry, env: &CcEnv) {
    registry.register(CODER, |c| Ok(Box::new(Coder(LlmFlow::from_config(c)?))));
    registry.register(PLANNER, |c| Ok(Box::new(Planner(LlmFlow::from_config(c)?))));
    let tester_env = env.clone();
    registry.register(CODE_TESTER, move |c| {
        Ok(Box::new(CodeTester {
            language: c.text_param("language")?.unwrap_or("python").to_string(),
            env: tester_env.clone(),
        }))
    });
    let console = env.console.clone();
    registry.register(ORACLE_PLAN, move |c| OraclePlan::from_config(c, console.clone()).map(|b| Box::new(b) as _));
}

/// LLM flow whose output is the extracted program. A completion with no
/// code block that declares the work final keeps the previous program.
pub struct Coder(LlmFlow);

impl FlowBehavior for Coder {
    fn run(&self, scope: &mut FlowScope<'_>, input: &Message) -> Result<FlowOutput, FlowError> {
        let completion = self.0.respond(scope, input)?;
        let previous = scope.state().get(CODE_KEY).and_then(Value::as_str).map(str::to_string);
        let code = match (extract_code(&completion), previous) {
            (Ok(code), _) => code.source,
            (Err(_), Some(previous)) if detect_final_answer(&completion) => previous,
            (Err(e), _) => return Err(scope.fail(format!("malformed completion: {e}"))),
        };
        scope.set_state(CODE_KEY, code.as_str().into())?;
        let mut out = Payload::new();
        out.insert(CODE_KEY.into(), code.into());
        out.insert(ANSWER_KEY.into(), completion.into());
        Ok(out.into())
    }
}

/// LLM flow whose output is the extracted conceptual solution.
pub struct Planner(LlmFlow);

impl FlowBehavior for Planner {
    fn run(&self, scope: &mut FlowScope<'_>, input: &Message) -> Result<FlowOutput, FlowError> {
        let completion = self.0.respond(scope, input)?;
        let previous = scope.state().get(PLAN_KEY).and_then(Value::as_str).map(str::to_string);
        let declared_final = detect_final_answer(&completion) && !completion.contains(PLAN_HEADER);
        let plan = if declared_final {
            previous.ok_or_else(|| scope.fail("malformed completion: final answer before any plan"))?
        } else {
            extract_plan(&completion).map_err(|e| scope.fail(format!("malformed completion: {e}")))?
        };
        scope.set_state(PLAN_KEY, plan.as_str().into())?;
        let mut out = Payload::new();
        out.insert(PLAN_KEY.into(), plan.into());
        out.insert(ANSWER_KEY.into(), completion.into());
        Ok(out.into())
    }
}

/// Runs the candidate in `code` on the problem's public examples and
/// reports the verdict and the formatted issue summary.
pub struct CodeTester {
    language: String,
    env: CcEnv,
}

impl FlowBehavior for CodeTester {
    fn run(&self, scope: &mut FlowScope<'_>, input: &Message) -> Result<FlowOutput, FlowError> {
        let code = input
            .payload()
            .get(CODE_KEY)
            .and_then(Value::as_str)
            .ok_or_else(|| scope.fail("input has no code"))?;
        let tests: Vec<TestCase> = input
            .payload()
            .get(PUBLIC_TESTS_KEY)
            .ok_or_else(|| scope.fail("input has no public tests"))?
            .to_deserializable()
            .map_err(|e| scope.fail(format!("malformed public tests: {e}")))?;
        if tests.is_empty() {
            return Err(scope.fail("no public tests to run"));
        }
        let program = CandidateProgram::new(&self.language, code);
        let report = self
            .env
            .sandbox
            .run_tests(&program, &tests, &self.env.limits)
            .map_err(|e| scope.environment_error(e.to_string()))?;
        let mut out = Payload::new();
        out.insert(SUMMARY_KEY.into(), report.summary.into());
        out.insert(VERDICT_KEY.into(), report.verdict.as_str().into());
        Ok(out.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanMode {
    Dataset,
    Interactive,
}

impl PlanMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PlanMode::Dataset => "dataset",
            PlanMode::Interactive => "interactive",
        }
    }
}

/// Human-written plan: stored with the problem, or typed at a console.
pub struct OraclePlan {
    mode: PlanMode,
    console: Option<Arc<dyn PlanConsole>>,
}

impl OraclePlan {
    fn from_config(config: &FlowConfig, console: Option<Arc<dyn PlanConsole>>) -> Result<Self, ConfigError> {
        let mode = match config.text_param("mode")?.unwrap_or("dataset") {
            "dataset" => PlanMode::Dataset,
            "interactive" if console.is_some() => PlanMode::Interactive,
            "interactive" => return Err(ConfigError::invalid(&config.name, "mode", "no console attached")),
            other => return Err(ConfigError::invalid(&config.name, "mode", format!("unknown mode `{other}`"))),
        };
        Ok(OraclePlan { mode, console })
    }
}

const STATEMENT_SECTIONS: [(&str, &str); 4] = [
    ("# Problem statement", "problem_description"),
    ("# Input description", "input_description"),
    ("# Output description", "output_description"),
    ("", "io_examples_and_explanation"),
];

fn statement(payload: &Payload) -> String {
    STATEMENT_SECTIONS
        .iter()
        .filter_map(|(header, key)| {
            let text = payload.get(*key)?.render_text()?;
            Some(if header.is_empty() { text } else { format!("{header}\n{text}") })
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

impl FlowBehavior for OraclePlan {
    fn run(&self, scope: &mut FlowScope<'_>, input: &Message) -> Result<FlowOutput, FlowError> {
        let plan = match self.mode {
            PlanMode::Dataset => input
                .payload()
                .get(HUMAN_PLAN_KEY)
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| scope.fail("problem has no human_plan"))?,
            PlanMode::Interactive => {
                let console = self.console.as_ref().expect("checked at construction");
                console
                    .read_plan(&statement(input.payload()))
                    .map_err(|e| scope.environment_error(format!("console: {e}")))?
            }
        };
        if plan.trim().is_empty() {
            return Err(scope.fail("empty plan"));
        }
        let mut out = Payload::new();
        out.insert(PLAN_KEY.into(), plan.into());
        Ok(out.into())
    }
}
