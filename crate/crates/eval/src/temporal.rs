//! Monthly sliding-window solve rates.

use std::io;

use chrono::{Datelike, Months, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::{pass_at_1, solve_rate, Bootstrap, SolveRate, StatsError};

pub const DEFAULT_SPAN_MONTHS: u32 = 2;
pub const DEFAULT_STEP_MONTHS: u32 = 1;

#[derive(Debug, Error)]
pub enum TemporalError {
    #[error("window span must be at least one month")]
    NoSpan,
    #[error("window step must be at least one month")]
    NoStep,
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("temporal csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("temporal csv: {0}")]
    Io(#[from] io::Error),
}

/// Rate over `[window_start, window_end)`, both on the first of a month.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalPoint {
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub rate: SolveRate,
}

fn month_start(date: NaiveDate) -> NaiveDate {
    date.with_day(1).expect("day 1 exists")
}

/// Windows start on every `step`-th month from the first window that can
/// contain the earliest record through the month of the latest one. Windows
/// holding no records are left out.
pub fn sliding_window(
    dated: &[(NaiveDate, bool)],
    span_months: u32,
    step_months: u32,
    bootstrap: Option<&Bootstrap>,
) -> Result<Vec<TemporalPoint>, TemporalError> {
    if span_months == 0 {
        return Err(TemporalError::NoSpan);
    }
    if step_months == 0 {
        return Err(TemporalError::NoStep);
    }
    let (Some(first), Some(last)) = (
        dated.iter().map(|(d, _)| *d).min(),
        dated.iter().map(|(d, _)| *d).max(),
    ) else {
        return Ok(Vec::new());
    };
    let mut start = month_start(first) - Months::new(span_months - 1);
    let last = month_start(last);
    let mut points = Vec::new();
    while start <= last {
        let end = start + Months::new(span_months);
        let outcomes: Vec<bool> = dated
            .iter()
            .filter(|(d, _)| *d >= start && *d < end)
            .map(|(_, s)| *s)
            .collect();
        if !outcomes.is_empty() {
            let rate = match bootstrap {
                Some(b) => solve_rate(&outcomes, b)?,
                None => pass_at_1(&outcomes)?,
            };
            points.push(TemporalPoint {
                window_start: start,
                window_end: end,
                rate,
            });
        }
        start = start + Months::new(step_months);
    }
    Ok(points)
}

/// One exported row: a window of one variant's series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub variant: String,
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub n: usize,
    pub solved: usize,
    pub point: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

impl SeriesRow {
    pub fn new(variant: &str, point: &TemporalPoint) -> Self {
        SeriesRow {
            variant: variant.to_string(),
            window_start: point.window_start,
            window_end: point.window_end,
            n: point.rate.n,
            solved: point.rate.solved,
            point: point.rate.point,
            ci_low: point.rate.ci_low,
            ci_high: point.rate.ci_high,
        }
    }

    pub fn to_point(&self) -> TemporalPoint {
        TemporalPoint {
            window_start: self.window_start,
            window_end: self.window_end,
            rate: SolveRate {
                n: self.n,
                solved: self.solved,
                point: self.point,
                ci_low: self.ci_low,
                ci_high: self.ci_high,
            },
        }
    }
}

pub fn write_series_csv(rows: &[SeriesRow]) -> Result<String, TemporalError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn read_series_csv(text: &str) -> Result<Vec<SeriesRow>, TemporalError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    Ok(reader.deserialize().collect::<Result<_, _>>()?)
}
