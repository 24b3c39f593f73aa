//! Process-local registry of flow kinds.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::config::FlowConfig;
use crate::error::ConfigError;
use crate::flow::{FlowBehavior, FlowInstance};

/// Builds a behavior from a validated config. Composite kinds validate
/// their `params.children`; the registry instantiates those children.
pub type FlowFactory =
    Arc<dyn Fn(&FlowConfig) -> Result<Box<dyn FlowBehavior>, ConfigError> + Send + Sync>;

#[derive(Clone, Default)]
pub struct Registry {
    kinds: BTreeMap<String, FlowFactory>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    /// Registry with the atomic and composite kinds shipped in this crate.
    pub fn with_builtins() -> Self {
        let mut r = Registry::empty();
        crate::atomic::register(&mut r);
        crate::llm::register(&mut r);
        crate::compose::register(&mut r);
        r
    }

    pub fn register<F>(&mut self, kind: &str, factory: F)
    where
        F: Fn(&FlowConfig) -> Result<Box<dyn FlowBehavior>, ConfigError> + Send + Sync + 'static,
    {
        self.kinds.insert(kind.to_string(), Arc::new(factory));
    }

    pub fn contains(&self, kind: &str) -> bool {
        self.kinds.contains_key(kind)
    }

    pub fn kinds(&self) -> impl Iterator<Item = &str> {
        self.kinds.keys().map(String::as_str)
    }

    /// Instantiates a flow tree with fresh ids and empty state.
    pub fn create_flow(&self, config: &FlowConfig) -> Result<FlowInstance, ConfigError> {
        config.validate()?;
        let factory = self
            .kinds
            .get(&config.kind)
            .ok_or_else(|| ConfigError::UnknownKind(config.kind.clone()))?;
        let behavior = factory(config)?;
        let children = config
            .children()?
            .iter()
            .map(|c| self.create_flow(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FlowInstance::assemble(config.clone(), behavior, children))
    }
}
