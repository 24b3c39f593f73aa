//! Report files derived from persisted records. Rendering depends only on
//! the records and the run manifest.

use std::io;
use std::path::{Path, PathBuf};

use cc_flows::FlowVariant;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::record::RunRecord;
use crate::stats::{Bootstrap, StatsError};
use crate::table::{rates_by_bucket, render_results_csv, render_results_table, TableError};
use crate::temporal::{sliding_window, write_series_csv, SeriesRow, TemporalError};

pub const MANIFEST_FILE: &str = "run.json";
pub const RESULTS_TEXT: &str = "results.txt";
pub const RESULTS_CSV: &str = "results.csv";
pub const TEMPORAL_CSV: &str = "temporal.csv";

/// Settings a report needs to be re-rendered from the records alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub variants: Vec<String>,
    pub baseline: String,
    pub cutoff: NaiveDate,
    pub bootstrap: Bootstrap,
    pub span_months: u32,
    pub step_months: u32,
}

impl RunManifest {
    pub fn new(variants: &[FlowVariant], cutoff: NaiveDate, seed: u64) -> Self {
        RunManifest {
            variants: variants.iter().map(|v| v.to_string()).collect(),
            baseline: FlowVariant::BASELINE.to_string(),
            cutoff,
            bootstrap: Bootstrap::with_seed(seed),
            span_months: crate::temporal::DEFAULT_SPAN_MONTHS,
            step_months: crate::temporal::DEFAULT_STEP_MONTHS,
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {source}", path.display())]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("no records to report")]
    NoRecords,
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub table_text: String,
    pub table_csv: String,
    pub temporal_csv: String,
}

/// Records of variants missing from the manifest are ignored.
pub fn build_report(records: &[RunRecord], manifest: &RunManifest) -> Result<Report, ReportError> {
    let records: Vec<RunRecord> = records
        .iter()
        .filter(|r| manifest.variants.contains(&r.variant))
        .cloned()
        .collect();
    let records = records.as_slice();
    if records.is_empty() {
        return Err(ReportError::NoRecords);
    }
    let rates = rates_by_bucket(records, manifest.cutoff, &manifest.bootstrap)?;
    let table_text = render_results_table(&rates, &manifest.variants, &manifest.baseline)?;
    let table_csv = render_results_csv(&rates, &manifest.variants, &manifest.baseline)?;
    let mut rows = Vec::new();
    for variant in &manifest.variants {
        let dated: Vec<_> = records
            .iter()
            .filter(|r| &r.variant == variant)
            .map(|r| (r.release_date, r.solved))
            .collect();
        let points = sliding_window(&dated, manifest.span_months, manifest.step_months, Some(&manifest.bootstrap))?;
        rows.extend(points.iter().map(|p| SeriesRow::new(variant, p)));
    }
    Ok(Report {
        table_text,
        table_csv,
        temporal_csv: write_series_csv(&rows)?,
    })
}

fn write(path: PathBuf, text: &str) -> Result<(), ReportError> {
    std::fs::write(&path, text).map_err(|source| ReportError::Io { path, source })
}

pub fn write_report(run_dir: &Path, report: &Report) -> Result<(), ReportError> {
    write(run_dir.join(RESULTS_TEXT), &report.table_text)?;
    write(run_dir.join(RESULTS_CSV), &report.table_csv)?;
    write(run_dir.join(TEMPORAL_CSV), &report.temporal_csv)
}

pub fn write_manifest(run_dir: &Path, manifest: &RunManifest) -> Result<(), ReportError> {
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes") + "\n";
    write(run_dir.join(MANIFEST_FILE), &text)
}

pub fn read_manifest(run_dir: &Path) -> Result<RunManifest, ReportError> {
    let path = run_dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|source| ReportError::Io {
        path: path.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ReportError::Manifest { path, source })
}
