use std::io::{self, Read, Write};
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::Path;
use std::process::{Child, Command, ExitStatus, Stdio};
use std::thread;

use wait_timeout::ChildExt;

use crate::compare::compare_output;
use crate::interpreter::Interpreters;
use crate::report::{render_summary, DEFAULT_ISSUE_TITLE};
use crate::types::{
    CandidateProgram, ExecutionLimits, Failure, SandboxError, TestCase, TestReport, Verdict,
};

/// Interpreter table plus report settings.
#[derive(Debug, Clone)]
pub struct Sandbox {
    pub interpreters: Interpreters,
    pub issue_title: String,
}

impl Default for Sandbox {
    fn default() -> Self {
        Sandbox::new(Interpreters::default())
    }
}

impl Sandbox {
    pub fn new(interpreters: Interpreters) -> Self {
        Sandbox {
            interpreters,
            issue_title: DEFAULT_ISSUE_TITLE.to_string(),
        }
    }

    pub fn with_issue_title(mut self, title: impl Into<String>) -> Self {
        self.issue_title = title.into();
        self
    }

    pub fn run_tests(
        &self,
        program: &CandidateProgram,
        tests: &[TestCase],
        limits: &ExecutionLimits,
    ) -> Result<TestReport, SandboxError> {
        let interpreter = self
            .interpreters
            .get(&program.language_tag)
            .ok_or_else(|| SandboxError::UnknownLanguage(program.language_tag.clone()))?;
        if program.source.trim().is_empty() {
            return Err(SandboxError::EmptySource);
        }
        if tests.is_empty() {
            return Err(SandboxError::NoTests);
        }
        if limits.wall_time.is_zero() || limits.memory == 0 {
            return Err(SandboxError::InvalidLimits);
        }

        let dir = tempfile::Builder::new()
            .prefix("flows-sandbox-")
            .tempdir()
            .map_err(SandboxError::Workspace)?;
        std::fs::write(dir.path().join(&interpreter.file_name), &program.source)
            .map_err(SandboxError::Workspace)?;

        let (verdict, failures) = judge(dir.path(), interpreter, tests, limits)?;
        let summary = render_summary(verdict, &failures, &self.issue_title);
        Ok(TestReport {
            verdict,
            failures,
            summary,
        })
    }
}

/// Runs with the default python interpreter and issue title.
pub fn run_tests(
    program: &CandidateProgram,
    tests: &[TestCase],
    limits: &ExecutionLimits,
) -> Result<TestReport, SandboxError> {
    Sandbox::default().run_tests(program, tests, limits)
}

fn judge(
    dir: &Path,
    interpreter: &crate::interpreter::Interpreter,
    tests: &[TestCase],
    limits: &ExecutionLimits,
) -> Result<(Verdict, Vec<Failure>), SandboxError> {
    if let Some((program, args)) = interpreter.check_command() {
        match execute(dir, &program, &args, "", limits)? {
            Outcome::Finished { status, stderr, .. } if !status.success() => {
                let failure = Failure {
                    index: 0,
                    input: String::new(),
                    expected: None,
                    actual: error_text(dir, &stderr, status),
                };
                return Ok((Verdict::CompilationError, vec![failure]));
            }
            Outcome::TimedOut => return Ok((Verdict::Timeout, Vec::new())),
            Outcome::Finished { .. } => {}
        }
    }

    let (program, args) = interpreter.run_command();
    let mut wrong = Vec::new();
    for (i, test) in tests.iter().enumerate() {
        let index = i + 1;
        match execute(dir, &program, &args, &test.input, limits)? {
            Outcome::TimedOut => {
                let failure = Failure {
                    index,
                    input: test.input.clone(),
                    expected: test.expected_output.clone(),
                    actual: String::new(),
                };
                return Ok((Verdict::Timeout, vec![failure]));
            }
            Outcome::Finished { status, stderr, .. } if !status.success() => {
                let failure = Failure {
                    index,
                    input: test.input.clone(),
                    expected: test.expected_output.clone(),
                    actual: error_text(dir, &stderr, status),
                };
                return Ok((Verdict::RuntimeError, vec![failure]));
            }
            Outcome::Finished { stdout, .. } => {
                if let Some(expected) = &test.expected_output {
                    if !compare_output(expected, &stdout) {
                        wrong.push(Failure {
                            index,
                            input: test.input.clone(),
                            expected: Some(expected.clone()),
                            actual: stdout,
                        });
                    }
                }
            }
        }
    }
    if wrong.is_empty() {
        Ok((Verdict::AllPassed, wrong))
    } else {
        Ok((Verdict::WrongAnswer, wrong))
    }
}

enum Outcome {
    Finished {
        status: ExitStatus,
        stdout: String,
        stderr: String,
    },
    TimedOut,
}

fn execute(
    dir: &Path,
    program: &str,
    args: &[String],
    stdin: &str,
    limits: &ExecutionLimits,
) -> Result<Outcome, SandboxError> {
    let memory = limits.memory;
    let mut command = Command::new(program);
    command
        .args(args)
        .current_dir(dir)
        .env("PYTHONHASHSEED", "0")
        .env("PYTHONDONTWRITEBYTECODE", "1")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    // SAFETY: only async-signal-safe libc calls between fork and exec.
    unsafe {
        command.pre_exec(move || {
            if libc::setpgid(0, 0) != 0 {
                return Err(io::Error::last_os_error());
            }
            let limit = libc::rlimit {
                rlim_cur: memory as libc::rlim_t,
                rlim_max: memory as libc::rlim_t,
            };
            if libc::setrlimit(libc::RLIMIT_AS, &limit) != 0 {
                return Err(io::Error::last_os_error());
            }
            Ok(())
        });
    }
    let mut child = command.spawn().map_err(|source| SandboxError::Spawn {
        program: program.into(),
        source,
    })?;

    let input = stdin.as_bytes().to_vec();
    let mut child_stdin = child.stdin.take().expect("piped stdin");
    let writer = thread::spawn(move || {
        // A program that exits without reading its input closes the pipe.
        let _ = child_stdin.write_all(&input);
    });
    let stdout = drain(child.stdout.take().expect("piped stdout"));
    let stderr = drain(child.stderr.take().expect("piped stderr"));

    let waited = child.wait_timeout(limits.wall_time).map_err(SandboxError::Wait)?;
    let status = match waited {
        Some(status) => status,
        None => {
            kill_group(&mut child);
            let _ = writer.join();
            let _ = stdout.join();
            let _ = stderr.join();
            return Ok(Outcome::TimedOut);
        }
    };
    // Reap stragglers the program may have left in its group.
    kill_group(&mut child);
    let _ = writer.join();
    Ok(Outcome::Finished {
        status,
        stdout: stdout.join().unwrap_or_default(),
        stderr: stderr.join().unwrap_or_default(),
    })
}

fn drain<R: Read + Send + 'static>(mut pipe: R) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut bytes = Vec::new();
        let _ = pipe.read_to_end(&mut bytes);
        String::from_utf8_lossy(&bytes).into_owned()
    })
}

fn kill_group(child: &mut Child) {
    let pid = child.id() as libc::pid_t;
    // SAFETY: signalling our own child's process group.
    unsafe {
        libc::killpg(pid, libc::SIGKILL);
    }
    let _ = child.wait();
}

/// Trimmed stderr with the sandbox directory removed from paths, so
/// reports do not depend on where the run happened.
fn error_text(dir: &Path, stderr: &str, status: ExitStatus) -> String {
    let prefix = format!("{}/", dir.display());
    let text = stderr.replace(&prefix, "");
    let text = text.trim_end();
    if !text.is_empty() {
        return text.to_string();
    }
    match (status.code(), status.signal()) {
        (Some(code), _) => format!("Process exited with status {code}"),
        (None, Some(signal)) => format!("Process terminated by signal {signal}"),
        _ => "Process failed".to_string(),
    }
}
