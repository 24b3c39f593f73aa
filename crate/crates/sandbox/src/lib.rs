//! Runs candidate programs against test cases in a child process and
//! renders the issue report handed back to the generator.

mod compare;
mod exec;
mod interpreter;
mod report;
mod types;

pub use compare::compare_output;
pub use exec::{run_tests, Sandbox};
pub use interpreter::{Interpreter, Interpreters, SOURCE_SLOT};
pub use report::{format_report, DEFAULT_ISSUE_TITLE};
pub use types::{CandidateProgram, ExecutionLimits, Failure, SandboxError, TestCase, TestReport, Verdict};
