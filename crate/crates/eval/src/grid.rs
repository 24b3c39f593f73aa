//! Runs every (problem, variant) pair once, persisting each record as soon
//! as it is produced.

use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::Arc;
use std::time::Instant;

use cc_flows::{Attempt, FlowVariant, Problem, Runner};
use flows_core::backend::ResponseCache;
use flows_core::{Backend, TraceSink};
use thiserror::Error;

use crate::record::{RecordError, RecordLog, RunRecord, RECORDS_FILE};

pub const TRACE_FILE: &str = "trace.log";

/// Builds the backend for one pair; errors become the pair's error note.
pub type BackendFactory = dyn Fn(&Problem, FlowVariant) -> Result<Arc<dyn Backend>, String> + Send + Sync;

#[derive(Clone)]
pub struct GridSettings {
    pub run_dir: PathBuf,
    pub workers: usize,
    pub resume: bool,
    pub cache: Option<Arc<ResponseCache>>,
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("{}: {source}", path.display())]
    RunDir {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Records(#[from] RecordError),
    #[cfg(feature = "parallel")]
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    /// All persisted records, sorted by (problem, variant).
    pub records: Vec<RunRecord>,
    pub new_runs: usize,
}

pub fn trace_ref(problem_id: &str, variant: FlowVariant) -> String {
    format!("{problem_id}/{variant}/{TRACE_FILE}")
}

fn record_of(problem: &Problem, variant: FlowVariant, attempt: Option<Attempt>, error: Option<String>) -> RunRecord {
    let attempt_error = attempt.as_ref().and_then(|a| a.error.clone());
    RunRecord {
        problem_id: problem.id.clone(),
        variant: variant.to_string(),
        solved: attempt.as_ref().is_some_and(|a| a.solved),
        rounds_used: attempt.as_ref().map_or(0, |a| a.rounds_used),
        release_date: problem.release_date,
        trace_ref: trace_ref(&problem.id, variant),
        wall_time: 0.0,
        source: problem.source,
        band: problem.band(),
        verdict: attempt.as_ref().and_then(|a| a.verdict).map(|v| v.as_str().to_string()),
        error: error.or(attempt_error),
    }
}

/// Runs one pair, writing its trace under `run_dir`.
pub fn run_pair(
    runner: &Runner,
    backends: &BackendFactory,
    cache: Option<Arc<ResponseCache>>,
    run_dir: &Path,
    problem: &Problem,
    variant: FlowVariant,
) -> RunRecord {
    let started = Instant::now();
    let trace_path = run_dir.join(trace_ref(&problem.id, variant));
    let outcome = (|| {
        let backend = backends(problem, variant)?;
        if let Some(parent) = trace_path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
        }
        let trace = TraceSink::create(&trace_path).map_err(|e| e.to_string())?;
        Ok(runner.solve(problem, variant, backend, cache, Arc::new(trace)))
    })();
    let mut record = match outcome {
        Ok(attempt) => record_of(problem, variant, Some(attempt), None),
        Err(error) => record_of(problem, variant, None, Some(error)),
    };
    record.wall_time = started.elapsed().as_secs_f64();
    record
}

pub fn evaluate_grid(
    problems: &[Problem],
    variants: &[FlowVariant],
    runner: &Runner,
    backends: &BackendFactory,
    settings: &GridSettings,
) -> Result<GridOutcome, GridError> {
    if settings.workers == 0 {
        return Err(GridError::NoWorkers);
    }
    std::fs::create_dir_all(&settings.run_dir).map_err(|source| GridError::RunDir {
        path: settings.run_dir.clone(),
        source,
    })?;
    let (mut log, mut records) = RecordLog::open(&settings.run_dir.join(RECORDS_FILE), settings.resume)?;
    let pending: Vec<(&Problem, FlowVariant)> = problems
        .iter()
        .flat_map(|p| variants.iter().map(move |v| (p, *v)))
        .filter(|(p, v)| !log.contains(&p.id, &v.to_string()))
        .collect();
    let run = |(problem, variant): &(&Problem, FlowVariant)| {
        run_pair(runner, backends, settings.cache.clone(), &settings.run_dir, problem, *variant)
    };

    let (tx, rx) = mpsc::channel::<RunRecord>();
    let new_runs = pending.len();
    let written = std::thread::scope(|scope| {
        let writer = scope.spawn(move || -> Result<Vec<RunRecord>, RecordError> {
            let mut written = Vec::new();
            let mut failure = None;
            for record in rx {
                if failure.is_none() {
                    if let Err(e) = log.append(&record) {
                        failure = Some(e);
                    }
                }
                written.push(record);
            }
            failure.map_or(Ok(written), Err)
        });
        let dispatched = dispatch(&pending, settings.workers, &run, &tx);
        drop(tx);
        let written = writer.join().expect("record writer panicked");
        dispatched.map_err(GridError::from).and(written.map_err(GridError::from))
    })?;

    records.extend(written);
    records.sort_by_key(RunRecord::key);
    Ok(GridOutcome { records, new_runs })
}

#[cfg(feature = "parallel")]
fn dispatch<T: Sync>(
    pending: &[T],
    workers: usize,
    run: &(dyn Fn(&T) -> RunRecord + Sync),
    tx: &mpsc::Sender<RunRecord>,
) -> Result<(), rayon::ThreadPoolBuildError> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    pool.install(|| {
        pending.par_iter().with_max_len(1).for_each_with(tx.clone(), |tx, pair| {
            let _ = tx.send(run(pair));
        })
    });
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn dispatch<T: Sync>(
    pending: &[T],
    _workers: usize,
    run: &(dyn Fn(&T) -> RunRecord + Sync),
    tx: &mpsc::Sender<RunRecord>,
) -> Result<(), std::convert::Infallible> {
    for pair in pending {
        let _ = tx.send(run(pair));
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
impl From<std::convert::Infallible> for GridError {
    fn from(e: std::convert::Infallible) -> Self {
        match e {}
    }
}
