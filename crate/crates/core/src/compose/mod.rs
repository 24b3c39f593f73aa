//! Composite flows: sequential, circular and generator-critic topologies.
//!
//! Children always receive the composite's input payload overlaid with the
//! keys written by key mappings, so anything not remapped (the problem
//! statement, say) stays visible to every child.

mod circular;
mod generator_critic;
mod mapping;
mod sequential;

pub use circular::{Circular, CircularSpec};
pub use generator_critic::{GeneratorCritic, GeneratorCriticSpec, DEFAULT_STOP_KEY, DEFAULT_STOP_NEEDLE};
pub use mapping::{KeyMapping, MatchMode, TerminationPredicate};
pub use sequential::{Sequential, SequentialSpec};

use crate::registry::Registry;
use crate::value::Payload;

pub const SEQUENTIAL: &str = "sequential";
pub const CIRCULAR: &str = "circular";
pub const GENERATOR_CRITIC: &str = "generator_critic";

/// Reserved payload key reporting how many rounds a loop used.
pub const ROUNDS_USED_KEY: &str = "_rounds_used";

pub(crate) fn register(registry: &mut Registry) {
    registry.register(SEQUENTIAL, |c| Ok(Box::new(Sequential::from_config(c)?)));
    registry.register(CIRCULAR, |c| Ok(Box::new(Circular::from_config(c)?)));
    registry.register(GENERATOR_CRITIC, |c| Ok(Box::new(GeneratorCritic::from_config(c)?)));
}

/// `base` with every entry of `top` written over it.
pub fn overlay(base: &Payload, top: &Payload) -> Payload {
    let mut out = base.clone();
    out.extend(top.iter().map(|(k, v)| (k.clone(), v.clone())));
    out
}

/// A payload with reserved (underscore-prefixed) keys removed; the basis
/// for "payload-equal" comparisons.
pub fn without_reserved(payload: &Payload) -> Payload {
    payload
        .iter()
        .filter(|(k, _)| !crate::config::is_reserved(k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

/// `_rounds_used` from a payload, if present.
pub fn rounds_used(payload: &Payload) -> Option<u32> {
    payload
        .get(ROUNDS_USED_KEY)
        .and_then(crate::value::Value::as_f64)
        .map(|n| n as u32)
}
