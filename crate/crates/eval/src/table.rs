//! Baseline-plus-delta result tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use cc_flows::{Band, Source, Split};
use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::record::RunRecord;
use crate::stats::{solve_rate, Bootstrap, SolveRate, StatsError};

/// A column of the results table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bucket {
    pub source: Source,
    pub split: Split,
    pub band: Option<Band>,
}

impl Bucket {
    pub fn of(record: &RunRecord, cutoff: NaiveDate) -> Bucket {
        Bucket {
            source: record.source,
            split: Split::of(record.release_date, cutoff),
            band: record.band,
        }
    }

    fn source_label(&self) -> &'static str {
        match self.source {
            Source::Codeforces => "Codeforces",
            Source::Leetcode => "LeetCode",
        }
    }

    fn split_label(&self) -> &'static str {
        match self.split {
            Split::Pre => "Pre-cutoff",
            Split::Post => "Post-cutoff",
        }
    }

    fn band_label(&self) -> &'static str {
        match self.band {
            None => "",
            Some(Band::Easy) => "Easy",
            Some(Band::Medium) => "Medium",
            Some(Band::Hard) => "Hard",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.source, self.split.as_str())?;
        if let Some(band) = self.band {
            write!(f, "/{band}")?;
        }
        Ok(())
    }
}

pub type RateMap = BTreeMap<(String, Bucket), SolveRate>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("baseline `{baseline}` has no rate for {bucket}")]
    AbsentBaseline { baseline: String, bucket: Bucket },
}

/// Groups records by (variant, bucket) and computes bootstrap rates.
pub fn rates_by_bucket(records: &[RunRecord], cutoff: NaiveDate, bootstrap: &Bootstrap) -> Result<RateMap, StatsError> {
    let mut groups: BTreeMap<(String, Bucket), Vec<bool>> = BTreeMap::new();
    for record in records {
        groups
            .entry((record.variant.clone(), Bucket::of(record, cutoff)))
            .or_default()
            .push(record.solved);
    }
    groups
        .into_iter()
        .map(|(key, outcomes)| Ok((key, solve_rate(&outcomes, bootstrap)?)))
        .collect()
}

fn one_decimal(x: f64) -> String {
    let s = format!("{x:.1}");
    if s == "-0.0" {
        "0.0".into()
    } else {
        s
    }
}

fn signed(x: f64) -> String {
    let s = one_decimal(x);
    if s.starts_with('-') {
        s
    } else {
        format!("+{s}")
    }
}

fn with_half_width(value: String, rate: &SolveRate) -> String {
    match rate.half_width() {
        Some(h) => format!("{value} ±{}", one_decimal(h)),
        None => value,
    }
}

/// Absolute cell, e.g. `71.8 ±11.0`.
pub fn baseline_cell(rate: &SolveRate) -> String {
    with_half_width(one_decimal(rate.point), rate)
}

/// Delta cell, e.g. `+9.3 ±9.7`.
pub fn delta_cell(rate: &SolveRate, baseline: &SolveRate) -> String {
    with_half_width(signed(rate.point - baseline.point), rate)
}

pub const ABSENT_CELL: &str = "--";

/// The grid of cells: one row per variant, one column per bucket present in
/// the map.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub buckets: Vec<Bucket>,
    pub rows: Vec<(String, Vec<String>)>,
}

pub fn build_table(rates: &RateMap, variants: &[String], baseline: &str) -> Result<ResultsTable, TableError> {
    let buckets: Vec<Bucket> = rates.keys().map(|(_, b)| *b).collect::<BTreeSet<_>>().into_iter().collect();
    let base: Vec<&SolveRate> = buckets
        .iter()
        .map(|b| {
            rates.get(&(baseline.to_string(), *b)).ok_or(TableError::AbsentBaseline {
                baseline: baseline.to_string(),
                bucket: *b,
            })
        })
        .collect::<Result<_, _>>()?;
    let rows = variants
        .iter()
        .map(|variant| {
            let cells = buckets
                .iter()
                .zip(&base)
                .map(|(bucket, base)| match rates.get(&(variant.clone(), *bucket)) {
                    None => ABSENT_CELL.to_string(),
                    Some(rate) if variant == baseline => baseline_cell(rate),
                    Some(rate) => delta_cell(rate, base),
                })
                .collect();
            (variant.clone(), cells)
        })
        .collect();
    Ok(ResultsTable { buckets, rows })
}

/// Aligned plain-text rendering with three header lines: source, cutoff
/// side and difficulty band.
pub fn render_results_table(rates: &RateMap, variants: &[String], baseline: &str) -> Result<String, TableError> {
    let table = build_table(rates, variants, baseline)?;
    let headers: [Vec<&str>; 3] = [
        table.buckets.iter().map(Bucket::source_label).collect(),
        table.buckets.iter().map(Bucket::split_label).collect(),
        table.buckets.iter().map(Bucket::band_label).collect(),
    ];
    let first = table.rows.iter().map(|(v, _)| v.chars().count()).max().unwrap_or(0).max("Variant".len());
    let widths: Vec<usize> = (0..table.buckets.len())
        .map(|i| {
            let cells = table.rows.iter().map(|(_, c)| c[i].chars().count());
            let heads = headers.iter().map(|h| h[i].chars().count());
            cells.chain(heads).max().unwrap_or(0)
        })
        .collect();
    let line = |label: &str, cells: &[&str]| {
        let mut out = format!("{label:<first$}");
        for (cell, w) in cells.iter().zip(&widths) {
            out.push_str(&format!(" | {cell:<w$}"));
        }
        out.trim_end().to_string()
    };
    let mut out = Vec::new();
    for (i, head) in headers.iter().enumerate() {
        out.push(line(if i == 0 { "Variant" } else { "" }, head));
    }
    let mut rule = "-".repeat(first);
    for w in &widths {
        rule.push_str(&format!("-+-{}", "-".repeat(*w)));
    }
    out.push(rule);
    for (variant, cells) in &table.rows {
        let cells: Vec<&str> = cells.iter().map(String::as_str).collect();
        out.push(line(variant, &cells));
    }
    Ok(out.join("\n") + "\n")
}

#[derive(Serialize)]
struct CsvRow<'a> {
    variant: &'a str,
    source: String,
    split: &'static str,
    band: Option<&'static str>,
    n: Option<usize>,
    solved: Option<usize>,
    point: Option<f64>,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
    cell: &'a str,
}

/// The same table in long comma-separated form, one row per (variant,
/// bucket) cell, with unrounded numbers next to the rendered cell.
pub fn render_results_csv(rates: &RateMap, variants: &[String], baseline: &str) -> Result<String, TableError> {
    let table = build_table(rates, variants, baseline)?;
    let mut writer = csv::Writer::from_writer(Vec::new());
    for (variant, cells) in &table.rows {
        for (bucket, cell) in table.buckets.iter().zip(cells) {
            let rate = rates.get(&(variant.clone(), *bucket));
            writer
                .serialize(CsvRow {
                    variant,
                    source: bucket.source.to_string(),
                    split: bucket.split.as_str(),
                    band: bucket.band.map(Band::as_str),
                    n: rate.map(|r| r.n),
                    solved: rate.map(|r| r.solved),
                    point: rate.map(|r| r.point),
                    ci_low: rate.and_then(|r| r.ci_low),
                    ci_high: rate.and_then(|r| r.ci_high),
                    cell,
                })
                .expect("in-memory csv write");
        }
    }
    let bytes = writer.into_inner().expect("in-memory csv flush");
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
