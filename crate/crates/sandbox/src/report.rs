use flows_core::{payload, render_template, Payload};

use crate::types::{Failure, TestReport, Verdict};

pub const DEFAULT_ISSUE_TITLE: &str = "# Issue with the last proposed solution";

const ISSUE_TITLE_SLOT: &str = "${.issue_title}";

const NO_ERROR: &str = "${.issue_title}
All of the executed tests passed.";

const ALL_TESTS_HEADER: &str = "${.issue_title}
The Python code does not solve the problem in the problem description due to logical errors. It fails on the following tests.";

const COMPILATION_ERROR: &str = "${.issue_title}
The execution resulted in a compilation error.
## Compilation error message:
{{error_message}}";

const TIMEOUT_ERROR: &str = "${.issue_title}
The execution timed out, the solution is not efficient enough.";

const RUNTIME_ERROR: &str = "${.issue_title}
The execution resulted in a runtime error on the following test.
## [Failed test] Input
```
{{test_input}}
```
## [Failed test] Runtime error message
{{error_message}}";

const SINGLE_TEST_ERROR: &str = "${.issue_title}
The Python code does not solve the problem in the problem description due to logical errors. It fails the following test:
## [Failed test] Input
```
{{test_input}}
```
## [Failed test] Expected output
```
{{expected_output}}
```
## [Failed test] Generated output
```
{{generated_output}}
```";

const TEST_ERROR: &str = "## [Failed test {{idx}}]
### [Failed test {{idx}}] Input
```
{{test_input}}
```
### [Failed test {{idx}}] Expected output
```
{{expected_output}}
```
### [Failed test {{idx}}] Generated output
```
{{generated_output}}
```";

/// Renders the issue report for a verdict.
pub fn format_report(report: &TestReport, issue_title: &str) -> String {
    render_summary(report.verdict, &report.failures, issue_title)
}

pub(crate) fn render_summary(verdict: Verdict, failures: &[Failure], issue_title: &str) -> String {
    let first = failures.first();
    match verdict {
        Verdict::AllPassed => fill(NO_ERROR, issue_title, payload! {}),
        Verdict::Timeout => fill(TIMEOUT_ERROR, issue_title, payload! {}),
        Verdict::CompilationError => fill(
            COMPILATION_ERROR,
            issue_title,
            payload! {"error_message" => first.map_or("", |f| f.actual.as_str())},
        ),
        Verdict::RuntimeError => fill(
            RUNTIME_ERROR,
            issue_title,
            payload! {
                "test_input" => first.map_or("", |f| fenced(&f.input)),
                "error_message" => first.map_or("", |f| f.actual.as_str()),
            },
        ),
        Verdict::WrongAnswer if failures.len() == 1 => {
            fill(SINGLE_TEST_ERROR, issue_title, failure_vars(&failures[0]))
        }
        Verdict::WrongAnswer => {
            let mut blocks = vec![fill(ALL_TESTS_HEADER, issue_title, payload! {})];
            for failure in failures {
                let mut vars = failure_vars(failure);
                vars.insert("idx".into(), failure.index.into());
                blocks.push(fill(TEST_ERROR, issue_title, vars));
            }
            blocks.join("\n")
        }
    }
}

fn failure_vars(failure: &Failure) -> Payload {
    payload! {
        "test_input" => fenced(&failure.input),
        "expected_output" => fenced(failure.expected.as_deref().unwrap_or("")),
        "generated_output" => fenced(&failure.actual),
    }
}

/// Text placed between fence lines loses its trailing newlines so the
/// closing fence sits on the next line.
fn fenced(text: &str) -> &str {
    text.trim_end_matches(['\n', '\r'])
}

fn fill(template: &str, issue_title: &str, mut vars: Payload) -> String {
    vars.insert("issue_title".into(), issue_title.into());
    let template = template.replace(ISSUE_TITLE_SLOT, "{{issue_title}}");
    render_template(&template, &vars).expect("report templates only use supplied fields")
}
