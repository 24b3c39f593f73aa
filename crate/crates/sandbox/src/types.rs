use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateProgram {
    pub language_tag: String,
    pub source: String,
}

impl CandidateProgram {
    pub fn new(language_tag: impl Into<String>, source: impl Into<String>) -> Self {
        CandidateProgram {
            language_tag: language_tag.into(),
            source: source.into(),
        }
    }

    pub fn python(source: impl Into<String>) -> Self {
        CandidateProgram::new("python", source)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestCase {
    pub input: String,
    /// Absent only for run-only probes, which are never judged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_output: Option<String>,
}

impl TestCase {
    pub fn new(input: impl Into<String>, expected_output: impl Into<String>) -> Self {
        TestCase {
            input: input.into(),
            expected_output: Some(expected_output.into()),
        }
    }

    pub fn probe(input: impl Into<String>) -> Self {
        TestCase {
            input: input.into(),
            expected_output: None,
        }
    }
}

pub const DEFAULT_WALL_TIME: Duration = Duration::from_secs(10);
pub const DEFAULT_MEMORY: u64 = 256 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecutionLimits {
    pub wall_time: Duration,
    /// Address-space limit in bytes.
    pub memory: u64,
}

impl Default for ExecutionLimits {
    fn default() -> Self {
        ExecutionLimits {
            wall_time: DEFAULT_WALL_TIME,
            memory: DEFAULT_MEMORY,
        }
    }
}

impl ExecutionLimits {
    pub fn new(wall_time: Duration, memory: u64) -> Result<Self, SandboxError> {
        if wall_time.is_zero() || memory == 0 {
            return Err(SandboxError::InvalidLimits);
        }
        Ok(ExecutionLimits { wall_time, memory })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    AllPassed,
    CompilationError,
    Timeout,
    RuntimeError,
    WrongAnswer,
}

impl Verdict {
    pub const ALL: [Verdict; 5] = [
        Verdict::AllPassed,
        Verdict::CompilationError,
        Verdict::Timeout,
        Verdict::RuntimeError,
        Verdict::WrongAnswer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::AllPassed => "AllPassed",
            Verdict::CompilationError => "CompilationError",
            Verdict::Timeout => "Timeout",
            Verdict::RuntimeError => "RuntimeError",
            Verdict::WrongAnswer => "WrongAnswer",
        }
    }

    pub fn parse(text: &str) -> Option<Verdict> {
        Verdict::ALL.into_iter().find(|v| v.as_str() == text)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One failed test. `index` is 1-based; a compilation failure uses 0.
/// `actual` holds the program's output, or the error text for compilation
/// and runtime failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub index: usize,
    pub input: String,
    pub expected: Option<String>,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestReport {
    pub verdict: Verdict,
    pub failures: Vec<Failure>,
    pub summary: String,
}

#[derive(Debug, Error)]
pub enum SandboxError {
    #[error("no interpreter configured for language `{0}`")]
    UnknownLanguage(String),
    #[error("candidate source is empty")]
    EmptySource,
    #[error("at least one test case is required")]
    NoTests,
    #[error("execution limits must be positive")]
    InvalidLimits,
    #[error("failed to prepare sandbox directory: {0}")]
    Workspace(#[source] std::io::Error),
    #[error("failed to start `{program}`: {source}")]
    Spawn {
        program: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("lost contact with child process: {0}")]
    Wait(#[source] std::io::Error),
}
