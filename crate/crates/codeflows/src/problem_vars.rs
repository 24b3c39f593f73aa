use flows_core::{Payload, Value};
use thiserror::Error;

use crate::dataset::Problem;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemPromptVars {
    pub problem_description: String,
    pub input_description: String,
    pub output_description: String,
    pub io_examples_and_explanation: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("problem `{0}` has no public examples")]
pub struct NoExamples(pub String);

/// Renders the example section shown to every flow.
pub fn build_prompt_vars(problem: &Problem) -> Result<ProblemPromptVars, NoExamples> {
    if problem.public_examples.is_empty() {
        return Err(NoExamples(problem.id.clone()));
    }
    let mut parts = vec!["# Example test cases".to_string()];
    for (i, example) in problem.public_examples.iter().enumerate() {
        let expected = example.expected_output.as_deref().unwrap_or("");
        parts.push(format!(
            "## Example {}\n### Input\n```\n{}\n```\n### Output\n```\n{}\n```",
            i + 1,
            example.input.trim_end_matches('\n'),
            expected.trim_end_matches('\n'),
        ));
    }
    if let Some(explanation) = problem.explanation.as_deref().filter(|e| !e.trim().is_empty()) {
        parts.push(format!("# Explanation\n{}", explanation.trim_end()));
    }
    Ok(ProblemPromptVars {
        problem_description: problem.problem_description.clone(),
        input_description: problem.input_description.clone(),
        output_description: problem.output_description.clone(),
        io_examples_and_explanation: parts.join("\n"),
    })
}

pub const PUBLIC_TESTS_KEY: &str = "public_tests";
pub const HUMAN_PLAN_KEY: &str = "human_plan";

/// The root input payload for a flow run on `problem`.
pub fn problem_payload(problem: &Problem) -> Result<Payload, NoExamples> {
    let vars = build_prompt_vars(problem)?;
    let mut payload = Payload::new();
    payload.insert("problem_description".into(), vars.problem_description.into());
    payload.insert("input_description".into(), vars.input_description.into());
    payload.insert("output_description".into(), vars.output_description.into());
    payload.insert("io_examples_and_explanation".into(), vars.io_examples_and_explanation.into());
    payload.insert(
        PUBLIC_TESTS_KEY.into(),
        Value::from_serializable(&problem.public_examples).expect("tests serialize"),
    );
    if let Some(plan) = &problem.human_plan {
        payload.insert(HUMAN_PLAN_KEY.into(), plan.as_str().into());
    }
    Ok(payload)
}
