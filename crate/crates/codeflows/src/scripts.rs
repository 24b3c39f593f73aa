//! Canned completions for the scripted backend profile.
//!
//! A script file `<problem_id>.json` lists responses per role; requests are
//! routed to a role by the system message that opens them.

use std::path::{Path, PathBuf};

use flows_core::ScriptedBackend;
use serde::Deserialize;
use thiserror::Error;

use crate::prompts::{CODE_CRITIC_NEEDLE, CODE_ROLE_NEEDLE, DEBUG_CRITIC_NEEDLE, PLAN_CRITIC_NEEDLE, PLAN_ROLE_NEEDLE};

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    #[serde(default)]
    pub code: Vec<String>,
    #[serde(default)]
    pub plan: Vec<String>,
    #[serde(default)]
    pub code_critic: Vec<String>,
    #[serde(default)]
    pub plan_critic: Vec<String>,
    #[serde(default)]
    pub debug_critic: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("no script for problem `{id}` at {}", path.display())]
    Missing { id: String, path: PathBuf },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Script {
    pub fn load(dir: &Path, problem_id: &str) -> Result<Script, ScriptError> {
        let path = dir.join(format!("{problem_id}.json"));
        if !path.exists() {
            return Err(ScriptError::Missing {
                id: problem_id.to_string(),
                path,
            });
        }
        let text = std::fs::read_to_string(&path).map_err(|source| ScriptError::Io {
            path: path.clone(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ScriptError::Parse { path, source })
    }

    /// A fresh backend serving this script; each role's queue is consumed
    /// independently.
    pub fn backend(&self) -> ScriptedBackend {
        ScriptedBackend::new(Vec::<String>::new())
            .with_route("debug_critic", DEBUG_CRITIC_NEEDLE, self.debug_critic.clone())
            .with_route("code_critic", CODE_CRITIC_NEEDLE, self.code_critic.clone())
            .with_route("plan_critic", PLAN_CRITIC_NEEDLE, self.plan_critic.clone())
            .with_route("code", CODE_ROLE_NEEDLE, self.code.clone())
            .with_route("plan", PLAN_ROLE_NEEDLE, self.plan.clone())
    }
}
