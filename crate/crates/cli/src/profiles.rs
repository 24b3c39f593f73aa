//! Named backend profiles.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use cc_flows::{FlowVariant, Problem, Script};
use flows_core::backend::{RemoteBackend, RemoteConfig};
use flows_core::Backend;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Profile {
    /// Canned responses from `<scripts>/<problem_id>.json`; the path is
    /// relative to the profiles file.
    Scripted { scripts: PathBuf },
    /// Chat-completions endpoint. The credential is read from the
    /// environment variable the config names.
    Remote {
        #[serde(default)]
        model: Option<String>,
        remote: RemoteConfig,
    },
}

impl Profile {
    pub fn model(&self) -> Option<&str> {
        match self {
            Profile::Scripted { .. } => None,
            Profile::Remote { model, .. } => model.as_deref(),
        }
    }

    pub fn is_remote(&self) -> bool {
        matches!(self, Profile::Remote { .. })
    }
}

pub fn load_profile(path: &Path, name: &str) -> Result<Profile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut profiles: BTreeMap<String, Profile> =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut profile = profiles.remove(name).ok_or_else(|| {
        let known: Vec<&str> = profiles.keys().map(String::as_str).collect();
        format!("unknown backend profile `{name}` (known: {})", known.join(", "))
    })?;
    if let Profile::Scripted { scripts } = &mut profile {
        *scripts = base.join(&*scripts);
    }
    Ok(profile)
}

/// Per-pair backend construction. Scripted profiles build a fresh backend
/// for every run; the remote client is shared.
pub struct Backends {
    profile: Profile,
    remote: Option<Arc<dyn Backend>>,
}

impl Backends {
    pub fn new(profile: Profile) -> Result<Self, String> {
        let remote = match &profile {
            Profile::Remote { remote, .. } => {
                let backend = RemoteBackend::new(remote.clone()).map_err(|e| e.to_string())?;
                Some(Arc::new(backend) as Arc<dyn Backend>)
            }
            Profile::Scripted { .. } => None,
        };
        Ok(Backends { profile, remote })
    }

    pub fn for_pair(&self, problem: &Problem, _variant: FlowVariant) -> Result<Arc<dyn Backend>, String> {
        match (&self.profile, &self.remote) {
            (_, Some(remote)) => Ok(remote.clone()),
            (Profile::Scripted { scripts }, None) => {
                let script = Script::load(scripts, &problem.id).map_err(|e| e.to_string())?;
                Ok(Arc::new(script.backend()))
            }
            (Profile::Remote { .. }, None) => unreachable!("remote client built in new"),
        }
    }
}
