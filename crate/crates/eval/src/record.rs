//! Run records and the append-only records file.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use cc_flows::{Band, Source};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const RECORDS_FILE: &str = "records.jsonl";

/// Outcome of one (problem, variant) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem_id: String,
    pub variant: String,
    /// Judged on hidden tests only.
    pub solved: bool,
    pub rounds_used: u32,
    pub release_date: NaiveDate,
    /// Trace path relative to the run directory.
    pub trace_ref: String,
    /// Seconds.
    pub wall_time: f64,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<Band>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRecord {
    pub fn key(&self) -> (String, String) {
        (self.problem_id.clone(), self.variant.clone())
    }

    /// The record with timing removed; equal runs compare equal.
    pub fn without_timing(&self) -> RunRecord {
        RunRecord {
            wall_time: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}:{line}: {source}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> RecordError + '_ {
    move |source| RecordError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads every complete line. A final line without a newline is an
/// interrupted write and is ignored.
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>, RecordError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut line = String::new();
    let mut number = 0;
    loop {
        line.clear();
        if reader.read_line(&mut line).map_err(io_err(path))? == 0 || !line.ends_with('\n') {
            break;
        }
        number += 1;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|source| RecordError::Parse {
            path: path.to_path_buf(),
            line: number,
            source,
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Single writer for a records file. Each record is one line, flushed
/// before `append` returns.
pub struct RecordLog {
    path: PathBuf,
    file: File,
    seen: BTreeSet<(String, String)>,
}

impl RecordLog {
    /// Opens for appending. With `resume`, existing records are kept and a
    /// torn final line is cut off; otherwise the file starts empty.
    pub fn open(path: &Path, resume: bool) -> Result<(RecordLog, Vec<RunRecord>), RecordError> {
        let existing = if resume { read_records(path)? } else { Vec::new() };
        if resume && path.exists() {
            let text = std::fs::read(path).map_err(io_err(path))?;
            let keep = text.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
            if keep < text.len() {
                let file = OpenOptions::new().write(true).open(path).map_err(io_err(path))?;
                file.set_len(keep as u64).map_err(io_err(path))?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .truncate(false)
            .open(path)
            .map_err(io_err(path))?;
        if !resume {
            file.set_len(0).map_err(io_err(path))?;
        }
        let seen = existing.iter().map(RunRecord::key).collect();
        Ok((
            RecordLog {
                path: path.to_path_buf(),
                file,
                seen,
            },
            existing,
        ))
    }

    pub fn contains(&self, problem_id: &str, variant: &str) -> bool {
        self.seen.contains(&(problem_id.to_string(), variant.to_string()))
    }

    pub fn append(&mut self, record: &RunRecord) -> Result<(), RecordError> {
        let mut line = serde_json::to_string(record).expect("records serialize");
        line.push('\n');
        self.file.write_all(line.as_bytes()).map_err(io_err(&self.path))?;
        self.file.flush().map_err(io_err(&self.path))?;
        self.seen.insert(record.key());
        Ok(())
    }
}
