//! Problem files, knowledge-cutoff splits and difficulty buckets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use flows_sandbox::TestCase;

pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// Suffix of sibling files holding hidden tests; these are skipped when a
/// directory is scanned for problems.
pub const HIDDEN_TESTS_SUFFIX: &str = ".tests.json";

pub fn default_cutoff() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 9, 1).expect("valid date")
}

pub fn parse_date(text: &str) -> Result<NaiveDate, chrono::ParseError> {
    NaiveDate::parse_from_str(text, DATE_FORMAT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Codeforces,
    Leetcode,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Codeforces => "codeforces",
            Source::Leetcode => "leetcode",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Easy,
    Medium,
    Hard,
}

impl Band {
    pub const ALL: [Band; 3] = [Band::Easy, Band::Medium, Band::Hard];

    pub fn as_str(self) -> &'static str {
        match self {
            Band::Easy => "easy",
            Band::Medium => "medium",
            Band::Hard => "hard",
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Difficulty {
    Rating(u32),
    Band(Band),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub id: String,
    pub source: Source,
    pub difficulty: Difficulty,
    pub release_date: NaiveDate,
    pub problem_description: String,
    pub input_description: String,
    pub output_description: String,
    pub public_examples: Vec<TestCase>,
    pub explanation: Option<String>,
    pub hidden_tests: Vec<TestCase>,
    pub human_plan: Option<String>,
}

impl Problem {
    pub fn band(&self) -> Option<Band> {
        match self.difficulty {
            Difficulty::Band(b) => Some(b),
            Difficulty::Rating(_) => None,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum HiddenTests {
    Inline(Vec<TestCase>),
    File(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    id: String,
    source: Source,
    difficulty: Difficulty,
    release_date: String,
    problem_description: String,
    input_description: String,
    output_description: String,
    public_examples: Vec<TestCase>,
    #[serde(default)]
    explanation: Option<String>,
    hidden_tests: HiddenTests,
    #[serde(default)]
    human_plan: Option<String>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
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
    #[error("{}: field `{field}`: {reason}", path.display())]
    Invalid {
        path: PathBuf,
        field: String,
        reason: String,
    },
    #[error("duplicate problem id `{id}` in {} and {}", first.display(), second.display())]
    DuplicateId {
        id: String,
        first: PathBuf,
        second: PathBuf,
    },
    #[error("problem `{0}` has a rating, not a difficulty band")]
    NotBanded(String),
}

/// Loads one problem file, or every problem file in a directory.
pub fn load_problems(path: &Path) -> Result<Vec<Problem>, DatasetError> {
    let io = |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    };
    let files = if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(io)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(io)?;
        files.retain(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            p.is_file() && name.ends_with(".json") && !name.ends_with(HIDDEN_TESTS_SUFFIX)
        });
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };

    let mut seen: BTreeMap<String, PathBuf> = BTreeMap::new();
    let mut problems = Vec::with_capacity(files.len());
    for file in files {
        let problem = load_problem(&file)?;
        if let Some(first) = seen.insert(problem.id.clone(), file.clone()) {
            return Err(DatasetError::DuplicateId {
                id: problem.id,
                first,
                second: file,
            });
        }
        problems.push(problem);
    }
    problems.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(problems)
}

pub fn load_problem(path: &Path) -> Result<Problem, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let raw: RawProblem = serde_json::from_str(&text).map_err(|source| DatasetError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    let invalid = |field: &str, reason: String| DatasetError::Invalid {
        path: path.to_path_buf(),
        field: field.to_string(),
        reason,
    };

    if raw.id.trim().is_empty() {
        return Err(invalid("id", "must be non-empty".into()));
    }
    let release_date = parse_date(&raw.release_date)
        .map_err(|e| invalid("release_date", format!("`{}` is not a YYYY-MM-DD date: {e}", raw.release_date)))?;
    if raw.public_examples.iter().any(|t| t.expected_output.is_none()) {
        return Err(invalid("public_examples", "every example needs expected_output".into()));
    }
    let hidden_tests = match raw.hidden_tests {
        HiddenTests::Inline(tests) => tests,
        HiddenTests::File(relative) => {
            let base = path.parent().unwrap_or(Path::new("."));
            let file = base.join(&relative);
            let text = std::fs::read_to_string(&file)
                .map_err(|e| invalid("hidden_tests", format!("cannot read {}: {e}", file.display())))?;
            serde_json::from_str(&text).map_err(|source| DatasetError::Parse { path: file, source })?
        }
    };
    if hidden_tests.iter().any(|t| t.expected_output.is_none()) {
        return Err(invalid("hidden_tests", "every hidden test needs expected_output".into()));
    }

    Ok(Problem {
        id: raw.id,
        source: raw.source,
        difficulty: raw.difficulty,
        release_date,
        problem_description: raw.problem_description,
        input_description: raw.input_description,
        output_description: raw.output_description,
        public_examples: raw.public_examples,
        explanation: raw.explanation,
        hidden_tests,
        human_plan: raw.human_plan,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Pre,
    Post,
}

impl Split {
    pub fn of(date: NaiveDate, cutoff: NaiveDate) -> Split {
        if date < cutoff {
            Split::Pre
        } else {
            Split::Post
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Pre => "pre",
            Split::Post => "post",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutoffSplit {
    pub cutoff: NaiveDate,
    pub pre: Vec<Problem>,
    pub post: Vec<Problem>,
}

/// Problems released on the cutoff date count as post-cutoff.
pub fn split_by_cutoff(problems: &[Problem], cutoff: NaiveDate) -> CutoffSplit {
    let (pre, post) = problems
        .iter()
        .cloned()
        .partition(|p| Split::of(p.release_date, cutoff) == Split::Pre);
    CutoffSplit { cutoff, pre, post }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Keep the earliest problems, ties broken by id.
    Chronological,
    /// Keep a seeded random sample, reported in chronological order.
    Seeded(u64),
}

pub type Buckets = BTreeMap<(Split, Band), Vec<Problem>>;

/// Groups banded problems into the six (split, band) buckets, optionally
/// truncating each to `target` problems.
pub fn bucket_leetcode(
    problems: &[Problem],
    cutoff: NaiveDate,
    target: Option<usize>,
    truncation: Truncation,
) -> Result<Buckets, DatasetError> {
    let mut buckets: Buckets = BTreeMap::new();
    for split in [Split::Pre, Split::Post] {
        for band in Band::ALL {
            buckets.insert((split, band), Vec::new());
        }
    }
    for problem in problems {
        let band = problem.band().ok_or_else(|| DatasetError::NotBanded(problem.id.clone()))?;
        buckets
            .get_mut(&(Split::of(problem.release_date, cutoff), band))
            .expect("all buckets present")
            .push(problem.clone());
    }
    for bucket in buckets.values_mut() {
        bucket.sort_by(|a, b| (a.release_date, &a.id).cmp(&(b.release_date, &b.id)));
        let Some(n) = target else { continue };
        if bucket.len() <= n {
            continue;
        }
        match truncation {
            Truncation::Chronological => bucket.truncate(n),
            Truncation::Seeded(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let keep: BTreeSet<String> = bucket
                    .choose_multiple(&mut rng, n)
                    .map(|p| p.id.clone())
                    .collect();
                bucket.retain(|p| keep.contains(&p.id));
            }
        }
    }
    Ok(buckets)
}
