#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use cc_flows::{load_problems, Attempt, CcEnv, FlowVariant, Problem, Runner, Script, VariantSettings};
use flows_core::{ScriptedBackend, TraceEvent, TraceSink};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn problems() -> Vec<Problem> {
    load_problems(&fixtures().join("dataset")).expect("fixture dataset loads")
}

pub fn problem(id: &str) -> Problem {
    problems().into_iter().find(|p| p.id == id).expect("fixture problem")
}

pub struct Run {
    pub attempt: Attempt,
    pub events: Vec<TraceEvent>,
    pub backend: Arc<ScriptedBackend>,
}

pub fn run_with(runner: &Runner, problem: &Problem, variant: FlowVariant, backend: ScriptedBackend) -> Run {
    let backend = Arc::new(backend);
    let trace = Arc::new(TraceSink::memory());
    let attempt = runner.solve(problem, variant, backend.clone(), None, trace.clone());
    Run {
        attempt,
        events: trace.events(),
        backend,
    }
}

pub fn run_scripted(problem: &Problem, variant: FlowVariant) -> Run {
    let script = Script::load(&fixtures().join("scripts"), &problem.id).expect("script");
    let runner = Runner::new(CcEnv::default(), VariantSettings::default());
    run_with(&runner, problem, variant, script.backend())
}

pub fn py(code: &str) -> String {
    format!("```python\n{code}\n```")
}
