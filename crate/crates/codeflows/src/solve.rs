//! One (problem, variant) run, judged on the hidden tests.

use std::sync::Arc;

use flows_core::backend::ResponseCache;
use flows_core::compose::rounds_used;
use flows_core::{Backend, FlowError, Registry, RunContext, TraceSink, Value};
use flows_sandbox::{CandidateProgram, Verdict};

use crate::dataset::Problem;
use crate::kinds::{registry, CcEnv, CODE_KEY};
use crate::problem_vars::problem_payload;
use crate::variant::{build_variant, FlowVariant, VariantSettings};

#[derive(Debug, Clone, PartialEq)]
pub struct Attempt {
    pub problem_id: String,
    pub variant: FlowVariant,
    /// Final program, when the flow produced one.
    pub code: Option<String>,
    pub rounds_used: u32,
    /// Verdict on the hidden tests.
    pub verdict: Option<Verdict>,
    pub solved: bool,
    pub error: Option<String>,
    /// The failure came from the environment (sandbox, console, trace I/O)
    /// rather than from the flow's own behavior.
    pub environment_error: bool,
}

impl Attempt {
    fn failed(problem: &Problem, variant: FlowVariant, error: String, environment_error: bool) -> Self {
        Attempt {
            problem_id: problem.id.clone(),
            variant,
            code: None,
            rounds_used: 0,
            verdict: None,
            solved: false,
            error: Some(error),
            environment_error,
        }
    }
}

pub struct Runner {
    env: CcEnv,
    settings: VariantSettings,
    registry: Arc<Registry>,
}

impl Runner {
    pub fn new(env: CcEnv, settings: VariantSettings) -> Self {
        let registry = Arc::new(registry(&env));
        Runner { env, settings, registry }
    }

    pub fn registry(&self) -> Arc<Registry> {
        self.registry.clone()
    }

    pub fn settings(&self) -> &VariantSettings {
        &self.settings
    }

    /// Runs `variant` on `problem`, then judges the final program on the
    /// hidden tests. Failures are reported in the attempt, never raised.
    pub fn solve(
        &self,
        problem: &Problem,
        variant: FlowVariant,
        backend: Arc<dyn Backend>,
        cache: Option<Arc<ResponseCache>>,
        trace: Arc<TraceSink>,
    ) -> Attempt {
        let fail = |error: String, env: bool| Attempt::failed(problem, variant, error, env);
        if problem.hidden_tests.is_empty() {
            return fail(format!("problem `{}` has no hidden tests", problem.id), false);
        }
        let config = match build_variant(variant, &self.settings) {
            Ok(c) => c,
            Err(e) => return fail(e.to_string(), false),
        };
        let payload = match problem_payload(problem) {
            Ok(p) => p,
            Err(e) => return fail(e.to_string(), false),
        };
        let mut flow = match self.registry.create_flow(&config) {
            Ok(f) => f,
            Err(e) => return fail(e.to_string(), false),
        };
        let mut ctx = RunContext::new(self.registry.clone(), trace.clone()).with_backend(backend);
        if let Some(cache) = cache {
            ctx = ctx.with_cache(cache);
        }
        let result = flow.run_root(&ctx, payload);
        let flushed = trace.flush();
        let output = match (result, flushed) {
            (Err(e), _) => return fail(describe(&e), e.is_environment()),
            (Ok(_), Err(e)) => return fail(e.to_string(), true),
            (Ok(output), Ok(())) => output,
        };
        let Some(code) = output.payload().get(CODE_KEY).and_then(Value::as_str).map(str::to_string) else {
            return fail("flow output has no code".into(), false);
        };
        let rounds = rounds_used(output.payload()).unwrap_or(1);
        let program = CandidateProgram::python(code.as_str());
        match self.env.sandbox.run_tests(&program, &problem.hidden_tests, &self.env.limits) {
            Ok(report) => Attempt {
                problem_id: problem.id.clone(),
                variant,
                code: Some(code),
                rounds_used: rounds,
                verdict: Some(report.verdict),
                solved: report.verdict == Verdict::AllPassed,
                error: None,
                environment_error: false,
            },
            Err(e) => Attempt {
                code: Some(code),
                rounds_used: rounds,
                ..fail(format!("hidden tests: {e}"), true)
            },
        }
    }
}

/// The innermost failure, prefixed by the flow that raised it. Instance ids
/// are omitted.
fn describe(error: &FlowError) -> String {
    let root = error.root_cause();
    let text = if std::ptr::eq(root, error) {
        error.to_string()
    } else {
        format!("{root} (while running: {error})")
    };
    match error.origin() {
        Some(id) => text.replace(&format!(" ({id})"), ""),
        None => text,
    }
}
