use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::config::{is_reserved, FlowConfig};
use crate::error::ConfigError;
use crate::value::{Payload, Value};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingEntry {
    pub from: String,
    pub to: String,
}

/// Renames keys of one payload into another. Targets are unique.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KeyMapping {
    entries: Vec<MappingEntry>,
}

impl KeyMapping {
    pub fn new<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        KeyMapping {
            entries: pairs
                .into_iter()
                .map(|(a, b)| MappingEntry {
                    from: a.into(),
                    to: b.into(),
                })
                .collect(),
        }
    }

    /// Maps every key to itself.
    pub fn identity<I, S>(keys: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        KeyMapping::new(keys.into_iter().map(|k| {
            let k = k.into();
            (k.clone(), k)
        }))
    }

    pub fn entries(&self) -> &[MappingEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn validate(&self, flow: &str, field: &str) -> Result<(), ConfigError> {
        let mut targets = HashSet::new();
        for e in &self.entries {
            for key in [&e.from, &e.to] {
                if key.is_empty() {
                    return Err(ConfigError::invalid(flow, field, "empty key"));
                }
                if is_reserved(key) {
                    return Err(ConfigError::ReservedKey {
                        flow: flow.to_string(),
                        key: key.clone(),
                    });
                }
            }
            if !targets.insert(&e.to) {
                return Err(ConfigError::DuplicateKey {
                    flow: flow.to_string(),
                    field: field.to_string(),
                    key: e.to.clone(),
                });
            }
        }
        Ok(())
    }

    /// Applies the mapping to `source`; returns the first missing source key
    /// on failure.
    pub fn apply(&self, source: &Payload) -> Result<Payload, String> {
        let mut out = Payload::new();
        for e in &self.entries {
            let value = source.get(&e.from).ok_or_else(|| e.from.clone())?;
            out.insert(e.to.clone(), value.clone());
        }
        Ok(out)
    }

    pub(crate) fn parse(config: &FlowConfig, field: &str, value: Option<&Value>) -> Result<Self, ConfigError> {
        let mapping: KeyMapping = match value {
            None => KeyMapping::default(),
            Some(v) => v
                .to_deserializable()
                .map_err(|e| ConfigError::invalid(&config.name, field, e))?,
        };
        mapping.validate(&config.name, field)?;
        Ok(mapping)
    }

    pub(crate) fn to_value(&self) -> Value {
        Value::from_serializable(self).expect("mappings serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    Contains,
    Equals,
}

/// Checks one payload key against a needle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminationPredicate {
    pub key: String,
    pub mode: MatchMode,
    pub needle: String,
}

impl TerminationPredicate {
    pub fn contains(key: impl Into<String>, needle: impl Into<String>) -> Self {
        TerminationPredicate {
            key: key.into(),
            mode: MatchMode::Contains,
            needle: needle.into(),
        }
    }

    pub fn equals(key: impl Into<String>, needle: impl Into<String>) -> Self {
        TerminationPredicate {
            key: key.into(),
            mode: MatchMode::Equals,
            needle: needle.into(),
        }
    }

    /// False when the key is absent or has no text form.
    pub fn holds(&self, payload: &Payload) -> bool {
        let Some(text) = payload.get(&self.key).and_then(Value::render_text) else {
            return false;
        };
        match self.mode {
            MatchMode::Contains => text.contains(&self.needle),
            MatchMode::Equals => text == self.needle,
        }
    }

    pub(crate) fn parse(config: &FlowConfig, field: &str, value: &Value) -> Result<Self, ConfigError> {
        let p: TerminationPredicate = value
            .to_deserializable()
            .map_err(|e| ConfigError::invalid(&config.name, field, e))?;
        if p.needle.is_empty() {
            return Err(ConfigError::invalid(&config.name, field, "needle must be non-empty"));
        }
        if p.key.is_empty() {
            return Err(ConfigError::invalid(&config.name, field, "key must be non-empty"));
        }
        Ok(p)
    }

    pub(crate) fn to_value(&self) -> Value {
        Value::from_serializable(self).expect("predicates serialize")
    }
}

pub(crate) fn parse_max_rounds(config: &FlowConfig) -> Result<u32, ConfigError> {
    let rounds = config
        .typed_param::<u32>("max_rounds")?
        .ok_or_else(|| ConfigError::invalid(&config.name, "max_rounds", "missing"))?;
    if rounds == 0 {
        return Err(ConfigError::invalid(&config.name, "max_rounds", "must be at least 1"));
    }
    Ok(rounds)
}
