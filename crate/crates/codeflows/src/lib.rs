//! Competitive-coding flows: problem datasets, prompt templates, the
//! plan/code variant family, and judging on hidden tests.

pub mod dataset;
pub mod extract;
pub mod kinds;
pub mod problem_vars;
pub mod prompts;
pub mod scripts;
pub mod solve;
pub mod variant;

pub use dataset::{load_problems, split_by_cutoff, Band, CutoffSplit, DatasetError, Problem, Source, Split};
pub use extract::{detect_final_answer, extract_code, ExtractError, ExtractedCode};
pub use kinds::{registry, CcEnv, PlanConsole, PlanMode, StreamConsole};
pub use problem_vars::{build_prompt_vars, problem_payload, ProblemPromptVars};
pub use scripts::Script;
pub use solve::{Attempt, Runner};
pub use variant::{build_variant, CodePart, FlowVariant, PlanPart, UnknownVariant, VariantSettings};
