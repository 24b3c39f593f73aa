//! Pulling programs and plans out of completions.

use thiserror::Error;

pub const FINAL_ANSWER: &str = "Final answer.";
pub const PLAN_HEADER: &str = "# Conceptual solution";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedCode {
    pub source: String,
    pub fence_label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("completion contains no fenced code block")]
    NoFencedBlock,
    #[error("completion contains no conceptual solution")]
    NoPlan,
}

/// True iff the completion contains the case-sensitive terminator.
pub fn detect_final_answer(completion: &str) -> bool {
    completion.contains(FINAL_ANSWER)
}

/// Fenced blocks as (label, body). An unterminated final block runs to the
/// end of the text.
fn fenced_blocks(text: &str) -> Vec<(String, String)> {
    let mut blocks = Vec::new();
    let mut open: Option<(String, Vec<&str>)> = None;
    for line in text.lines() {
        let trimmed = line.trim();
        match open.take() {
            None => {
                if let Some(label) = trimmed.strip_prefix("```") {
                    open = Some((label.trim().to_string(), Vec::new()));
                }
            }
            Some((label, body)) if trimmed == "```" => blocks.push((label, body.join("\n"))),
            Some((label, mut body)) => {
                body.push(line);
                open = Some((label, body));
            }
        }
    }
    if let Some((label, body)) = open {
        blocks.push((label, body.join("\n")));
    }
    blocks
}

/// The last non-empty block labelled `language`, else the last non-empty
/// unlabelled block.
pub fn extract_code_as(completion: &str, language: &str) -> Result<ExtractedCode, ExtractError> {
    let blocks: Vec<(String, String)> = fenced_blocks(completion)
        .into_iter()
        .filter(|(_, body)| !body.trim().is_empty())
        .collect();
    let pick = |want: &str| blocks.iter().rev().find(|(label, _)| label == want);
    pick(language)
        .or_else(|| pick(""))
        .map(|(label, body)| ExtractedCode {
            source: body.clone(),
            fence_label: label.clone(),
        })
        .ok_or(ExtractError::NoFencedBlock)
}

pub fn extract_code(completion: &str) -> Result<ExtractedCode, ExtractError> {
    extract_code_as(completion, "python")
}

/// Text following the last plan header, or the whole completion when the
/// header is absent.
pub fn extract_plan(completion: &str) -> Result<String, ExtractError> {
    let body = match completion.rfind(PLAN_HEADER) {
        Some(at) => &completion[at + PLAN_HEADER.len()..],
        None => completion,
    };
    let plan = body.trim();
    if plan.is_empty() {
        Err(ExtractError::NoPlan)
    } else {
        Ok(plan.to_string())
    }
}
