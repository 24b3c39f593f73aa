//! Flow configurations: plain data, loadable from JSON documents.

use std::collections::HashSet;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::value::{Payload, Value};

/// Keys starting with this prefix are reserved for the runtime.
pub const RESERVED_PREFIX: char = '_';

pub fn is_reserved(key: &str) -> bool {
    key.starts_with(RESERVED_PREFIX)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub name: String,
    pub kind: String,
    #[serde(default)]
    pub input_keys: Vec<String>,
    #[serde(default)]
    pub output_keys: Vec<String>,
    #[serde(default)]
    pub params: Payload,
}

impl FlowConfig {
    pub fn new(name: impl Into<String>, kind: impl Into<String>) -> Self {
        FlowConfig {
            name: name.into(),
            kind: kind.into(),
            input_keys: Vec::new(),
            output_keys: Vec::new(),
            params: Payload::new(),
        }
    }

    pub fn with_input_keys<I, S>(mut self, keys: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.input_keys = keys.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_output_keys<I, S>(mut self, keys: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.output_keys = keys.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_param(mut self, key: impl Into<String>, value: impl Into<Value>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }

    pub fn load(path: &Path) -> Result<FlowConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn to_value(&self) -> Value {
        Value::from_serializable(self).expect("flow configs always convert")
    }

    pub fn from_value(value: &Value) -> Result<FlowConfig, serde_json::Error> {
        value.to_deserializable()
    }

    /// Structural checks that do not depend on the kind.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.is_empty() {
            return Err(ConfigError::EmptyName);
        }
        for (field, keys) in [("input_keys", &self.input_keys), ("output_keys", &self.output_keys)] {
            let mut seen = HashSet::new();
            for key in keys {
                if key.is_empty() {
                    return Err(ConfigError::invalid(&self.name, field, "empty key"));
                }
                if is_reserved(key) {
                    return Err(ConfigError::ReservedKey {
                        flow: self.name.clone(),
                        key: key.clone(),
                    });
                }
                if !seen.insert(key) {
                    return Err(ConfigError::DuplicateKey {
                        flow: self.name.clone(),
                        field: field.to_string(),
                        key: key.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn param(&self, key: &str) -> Option<&Value> {
        self.params.get(key)
    }

    pub fn text_param(&self, key: &str) -> Result<Option<&str>, ConfigError> {
        match self.params.get(key) {
            None => Ok(None),
            Some(Value::Text(s)) => Ok(Some(s)),
            Some(other) => Err(ConfigError::invalid(
                &self.name,
                key,
                format!("expected text, found {}", other.kind_name()),
            )),
        }
    }

    pub fn required_text(&self, key: &str) -> Result<&str, ConfigError> {
        self.text_param(key)?
            .ok_or_else(|| ConfigError::invalid(&self.name, key, "missing"))
    }

    /// Deserializes an optional typed parameter, naming the field on error.
    pub fn typed_param<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.params
            .get(key)
            .map(|v| v.to_deserializable().map_err(|e| ConfigError::invalid(&self.name, key, e)))
            .transpose()
    }

    /// The child configurations listed under `params.children`.
    pub fn children(&self) -> Result<Vec<FlowConfig>, ConfigError> {
        let Some(value) = self.params.get("children") else {
            return Ok(Vec::new());
        };
        let list = value
            .as_list()
            .ok_or_else(|| ConfigError::invalid(&self.name, "children", "expected a list"))?;
        list.iter()
            .enumerate()
            .map(|(i, v)| {
                FlowConfig::from_value(v)
                    .map_err(|e| ConfigError::invalid(&self.name, &format!("children[{i}]"), e))
            })
            .collect()
    }

    pub fn set_children(&mut self, children: Vec<FlowConfig>) {
        self.params.insert(
            "children".into(),
            Value::List(children.iter().map(FlowConfig::to_value).collect()),
        );
    }
}
