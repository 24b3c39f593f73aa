use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Replaced by the candidate's file name in argument lists.
pub const SOURCE_SLOT: &str = "{source}";

/// How to check and run one language. Commands run inside the candidate's
/// working directory, so `{source}` expands to a bare file name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interpreter {
    pub program: String,
    pub args: Vec<String>,
    /// Syntax/byte-compile pass run once before the first test.
    #[serde(default)]
    pub check: Option<Vec<String>>,
    pub file_name: String,
}

impl Interpreter {
    pub fn python(program: impl Into<String>) -> Self {
        let program = program.into();
        Interpreter {
            check: Some(vec![
                program.clone(),
                "-m".into(),
                "py_compile".into(),
                SOURCE_SLOT.into(),
            ]),
            program,
            args: vec![SOURCE_SLOT.into()],
            file_name: "solution.py".into(),
        }
    }

    pub(crate) fn run_command(&self) -> (String, Vec<String>) {
        (self.program.clone(), self.expand(&self.args))
    }

    pub(crate) fn check_command(&self) -> Option<(String, Vec<String>)> {
        let check = self.check.as_ref()?;
        let (program, rest) = check.split_first()?;
        Some((program.clone(), self.expand(rest)))
    }

    fn expand(&self, args: &[String]) -> Vec<String> {
        args.iter().map(|a| a.replace(SOURCE_SLOT, &self.file_name)).collect()
    }
}

/// Language tag to interpreter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Interpreters(BTreeMap<String, Interpreter>);

impl Default for Interpreters {
    fn default() -> Self {
        Interpreters::python("python3")
    }
}

impl Interpreters {
    pub fn empty() -> Self {
        Interpreters(BTreeMap::new())
    }

    /// `python` and `py` tags bound to the given executable.
    pub fn python(program: &str) -> Self {
        Interpreters::empty()
            .with("python", Interpreter::python(program))
            .with("py", Interpreter::python(program))
    }

    pub fn with(mut self, tag: &str, interpreter: Interpreter) -> Self {
        self.0.insert(tag.to_string(), interpreter);
        self
    }

    pub fn get(&self, tag: &str) -> Option<&Interpreter> {
        self.0.get(tag)
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}
