mod profiles;

use std::io::{self, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use cc_flows::dataset::{load_problem, parse_date};
use cc_flows::{
    build_variant, load_problems, CcEnv, FlowVariant, PlanConsole, PlanMode, Problem, Runner, StreamConsole,
    UnknownVariant, VariantSettings,
};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use flows_core::backend::ResponseCache;
use flows_core::trace::{first_divergence, normalize, read_trace, replay_backend_from_events};
use flows_core::{EventKind, FlowConfig, Payload, RunContext, TraceSink};
use flows_eval::grid::{trace_ref, GridSettings};
use flows_eval::record::RECORDS_FILE;
use flows_eval::report::{build_report, read_manifest, write_manifest, write_report, RunManifest};
use flows_eval::{evaluate_grid, read_records};
use flows_sandbox::{ExecutionLimits, Interpreters, Sandbox};

use profiles::{load_profile, Backends};

#[derive(Parser)]
#[command(name = "flows", version, about = "Run, evaluate and replay competitive-coding flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one flow variant on one problem file.
    Run {
        problem: PathBuf,
        #[arg(long, default_value = "Code")]
        variant: String,
        #[arg(long, default_value = "runs/single")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a grid of problems and variants, then write the report.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        /// Comma-separated variant names; defaults to the nine-variant suite.
        #[arg(long, value_delimiter = ',')]
        variants: Vec<String>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value = "runs/latest")]
        out: PathBuf,
        #[arg(long, overrides_with = "no_resume")]
        resume: bool,
        #[arg(long)]
        no_resume: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Re-render the tables and series of a run directory.
    Report { run_dir: PathBuf },
    /// Re-execute a recorded run against its own backend responses.
    Replay {
        trace: PathBuf,
        /// Flow config to replay instead of the one recorded in the trace.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Inspect or empty the response cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
        #[arg(long, global = true, default_value = ".flows-cache")]
        dir: PathBuf,
    },
}

#[derive(Subcommand, Clone, Copy)]
enum CacheAction {
    Stats,
    Clear,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value = "scripted")]
    backend_profile: String,
    #[arg(long, default_value = "fixtures/profiles.json")]
    profiles: PathBuf,
    #[arg(long, default_value_t = flows_eval::stats::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value = "2021-09-01", value_parser = parse_cutoff)]
    cutoff: NaiveDate,
    /// Per-test wall-clock limit in seconds.
    #[arg(long, default_value_t = 10.0)]
    wall_time: f64,
    /// Per-test address-space limit in MiB.
    #[arg(long, default_value_t = 256)]
    memory: u64,
    /// Python interpreter used by the sandbox.
    #[arg(long, default_value = "python3")]
    python: String,
    #[arg(long, default_value_t = cc_flows::variant::DEFAULT_MAX_ROUNDS)]
    max_rounds: u32,
    /// Read Plan_Oracle plans from the console instead of the dataset.
    #[arg(long)]
    interactive_plan: bool,
    /// Cache remote completions in this directory.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

fn parse_cutoff(text: &str) -> Result<NaiveDate, String> {
    parse_date(text).map_err(|e| format!("expected YYYY-MM-DD: {e}"))
}

enum Failure {
    Unsolved(String),
    Usage(String),
    Environment(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Unsolved(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Environment(_) => 3,
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn environment(e: impl ToString) -> Failure {
    Failure::Environment(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            problem,
            variant,
            out,
            common,
        } => cmd_run(&problem, &variant, &out, &common),
        Command::Eval {
            dataset,
            variants,
            workers,
            out,
            no_resume,
            common,
            ..
        } => cmd_eval(&dataset, &variants, workers, &out, !no_resume, &common),
        Command::Report { run_dir } => cmd_report(&run_dir),
        Command::Replay { trace, config, common } => cmd_replay(&trace, config.as_deref(), &common),
        Command::Cache { action, dir } => cmd_cache(action, &dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Unsolved(m) if m.is_empty() => {}
                Failure::Unsolved(m) | Failure::Usage(m) | Failure::Environment(m) => eprintln!("flows: {m}"),
            }
            ExitCode::from(failure.code())
        }
    }
}

fn parse_variant(name: &str) -> Result<FlowVariant, Failure> {
    name.parse().map_err(|e: UnknownVariant| {
        let hint = e.suggestion().map(|s| format!("; did you mean `{s}`?")).unwrap_or_default();
        usage(format!("{e}{hint}"))
    })
}

fn env_for(common: &Common) -> Result<CcEnv, Failure> {
    if !(common.wall_time.is_finite() && common.wall_time > 0.0) {
        return Err(usage("--wall-time must be a positive number of seconds"));
    }
    let limits = ExecutionLimits::new(Duration::from_secs_f64(common.wall_time), common.memory * 1024 * 1024)
        .map_err(usage)?;
    let console = common.interactive_plan.then(|| {
        Arc::new(StreamConsole::new(BufReader::new(io::stdin()), io::stderr())) as Arc<dyn PlanConsole>
    });
    Ok(CcEnv {
        sandbox: Arc::new(Sandbox::new(Interpreters::python(&common.python))),
        limits,
        console,
    })
}

struct Setup {
    runner: Runner,
    backends: Backends,
    cache: Option<Arc<ResponseCache>>,
}

fn setup(common: &Common) -> Result<Setup, Failure> {
    let profile = load_profile(&common.profiles, &common.backend_profile).map_err(usage)?;
    let mut settings = VariantSettings {
        max_rounds: common.max_rounds,
        plan_mode: if common.interactive_plan {
            PlanMode::Interactive
        } else {
            PlanMode::Dataset
        },
        ..VariantSettings::default()
    };
    if let Some(model) = profile.model() {
        settings.model = model.to_string();
    }
    let cache = match (&common.cache_dir, profile.is_remote()) {
        (Some(dir), true) => Some(Arc::new(ResponseCache::open(dir).map_err(environment)?)),
        _ => None,
    };
    let backends = Backends::new(profile).map_err(environment)?;
    Ok(Setup {
        runner: Runner::new(env_for(common)?, settings),
        backends,
        cache,
    })
}

fn cmd_run(problem_file: &Path, variant: &str, out: &Path, common: &Common) -> Outcome {
    let variant = parse_variant(variant)?;
    let problem = load_problem(problem_file).map_err(usage)?;
    let setup = setup(common)?;
    build_variant(variant, setup.runner.settings()).map_err(usage)?;
    let backend = setup.backends.for_pair(&problem, variant).map_err(usage)?;
    let trace_path = out.join(trace_ref(&problem.id, variant));
    if let Some(parent) = trace_path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| environment(format!("{}: {e}", parent.display())))?;
    }
    let trace = TraceSink::create(&trace_path).map_err(environment)?;
    let attempt = setup.runner.solve(&problem, variant, backend, setup.cache.clone(), Arc::new(trace));

    if let Some(code) = &attempt.code {
        println!("{}", code.trim_end());
    }
    println!("verdict: {}", attempt.verdict.map_or("none", |v| v.as_str()));
    println!("rounds: {}", attempt.rounds_used);
    println!("trace: {}", trace_path.display());
    match attempt.error {
        Some(e) if attempt.environment_error => Err(environment(e)),
        Some(e) => Err(Failure::Unsolved(e)),
        None if attempt.solved => Ok(()),
        None => Err(Failure::Unsolved(String::new())),
    }
}

fn message_payload(body: &Payload) -> Option<&Payload> {
    body.get("message")?.as_map()?.get("payload")?.as_map()
}

fn cmd_eval(dataset: &Path, variants: &[String], workers: usize, out: &Path, resume: bool, common: &Common) -> Outcome {
    if workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    if common.interactive_plan && workers > 1 {
        return Err(usage("--interactive-plan requires --workers 1"));
    }
    let variants: Vec<FlowVariant> = if variants.is_empty() {
        FlowVariant::SUITE.to_vec()
    } else {
        variants.iter().map(|v| parse_variant(v.trim())).collect::<Result<_, _>>()?
    };
    if !variants.contains(&FlowVariant::BASELINE) {
        return Err(usage(format!("--variants must include the baseline `{}`", FlowVariant::BASELINE)));
    }
    let problems = load_problems(dataset).map_err(usage)?;
    let setup = setup(common)?;
    let backends = setup.backends;
    let factory = move |p: &Problem, v: FlowVariant| backends.for_pair(p, v);
    let settings = GridSettings {
        run_dir: out.to_path_buf(),
        workers,
        resume,
        cache: setup.cache.clone(),
    };
    let outcome = evaluate_grid(&problems, &variants, &setup.runner, &factory, &settings).map_err(environment)?;
    let manifest = RunManifest::new(&variants, common.cutoff, common.seed);
    write_manifest(out, &manifest).map_err(environment)?;
    let report = build_report(&outcome.records, &manifest).map_err(environment)?;
    write_report(out, &report).map_err(environment)?;
    print!("{}", report.table_text);
    let failed = outcome.records.iter().filter(|r| r.error.is_some()).count();
    println!(
        "{} new runs, {} records, {} with errors; outputs in {}",
        outcome.new_runs,
        outcome.records.len(),
        failed,
        out.display()
    );
    Ok(())
}

fn cmd_report(run_dir: &Path) -> Outcome {
    let manifest = read_manifest(run_dir).map_err(usage)?;
    let records = read_records(&run_dir.join(RECORDS_FILE)).map_err(usage)?;
    let report = build_report(&records, &manifest).map_err(usage)?;
    write_report(run_dir, &report).map_err(environment)?;
    print!("{}", report.table_text);
    Ok(())
}

fn cmd_replay(trace: &Path, config: Option<&Path>, common: &Common) -> Outcome {
    let original = read_trace(trace).map_err(usage)?;
    let config = match config {
        Some(path) => FlowConfig::load(path).map_err(usage)?,
        None => original
            .iter()
            .find(|e| e.kind == EventKind::FlowStart)
            .and_then(|e| e.body.get("config"))
            .ok_or_else(|| usage("trace has no recorded root config; pass --config"))
            .and_then(|v| FlowConfig::from_value(v).map_err(usage))?,
    };
    let input = original
        .iter()
        .find(|e| e.kind == EventKind::MessageIn)
        .and_then(|e| message_payload(&e.body))
        .cloned()
        .ok_or_else(|| usage("trace has no root input message"))?;

    let registry = Arc::new(cc_flows::registry(&CcEnv {
        console: None,
        ..env_for(common)?
    }));
    let sink = Arc::new(TraceSink::memory());
    let ctx = RunContext::new(registry.clone(), sink.clone()).with_backend(Arc::new(replay_backend_from_events(&original)));
    let mut flow = registry.create_flow(&config).map_err(usage)?;
    let result = flow.run_root(&ctx, input);
    match first_divergence(&normalize(&original), &normalize(&sink.events())) {
        None => {
            println!("identical");
            Ok(())
        }
        Some(diff) => {
            let cause = result.err().map(|e| format!("\nreplay error: {}", e.root_cause())).unwrap_or_default();
            Err(Failure::Unsolved(format!("diverged: {diff}{cause}")))
        }
    }
}

fn cmd_cache(action: CacheAction, dir: &Path) -> Outcome {
    let cache = ResponseCache::open(dir).map_err(environment)?;
    match action {
        CacheAction::Stats => {}
        CacheAction::Clear => {
            let removed = cache.clear().map_err(environment)?;
            println!("removed {removed} entries");
        }
    }
    let stats = cache.stats().map_err(environment)?;
    println!("entries: {}\nbytes: {}", stats.entries, stats.bytes);
    Ok(())
}

