//! Evaluation harness: grids of (problem, variant) runs, bootstrap solve
//! rates, sliding-window temporal series and baseline-plus-delta tables.

pub mod grid;
pub mod record;
pub mod report;
pub mod stats;
pub mod table;
pub mod temporal;

pub use grid::{evaluate_grid, BackendFactory, GridError, GridOutcome, GridSettings};
pub use record::{read_records, RecordLog, RunRecord};
pub use stats::{bootstrap_ci, pass_at_1, solve_rate, Bootstrap, SolveRate, StatsError};
pub use table::{render_results_csv, render_results_table, Bucket, RateMap};
pub use temporal::{sliding_window, TemporalPoint};
