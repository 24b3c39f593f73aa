//! `{{name}}` placeholder rendering.
//!
//! Rendering is a single left-to-right pass: substituted values are never
//! re-scanned, so a value may itself contain `{{...}}` text.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use crate::value::Payload;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("unresolved placeholder `{0}`")]
    Unresolved(String),
    #[error("placeholder `{name}` holds a {kind}, which has no text form")]
    NotRenderable { name: String, kind: &'static str },
}

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{\{([A-Za-z_][A-Za-z0-9_.\-]*)\}\}").unwrap())
}

pub fn render_template(template: &str, vars: &Payload) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(template.len());
    let mut last = 0;
    for caps in placeholder_re().captures_iter(template) {
        let whole = caps.get(0).unwrap();
        let name = &caps[1];
        let value = vars
            .get(name)
            .ok_or_else(|| TemplateError::Unresolved(name.to_string()))?;
        let text = value.render_text().ok_or_else(|| TemplateError::NotRenderable {
            name: name.to_string(),
            kind: value.kind_name(),
        })?;
        out.push_str(&template[last..whole.start()]);
        out.push_str(&text);
        last = whole.end();
    }
    out.push_str(&template[last..]);
    Ok(out)
}

/// Placeholder names referenced by a template, in sorted order.
pub fn placeholders(template: &str) -> BTreeSet<String> {
    placeholder_re()
        .captures_iter(template)
        .map(|c| c[1].to_string())
        .collect()
}
