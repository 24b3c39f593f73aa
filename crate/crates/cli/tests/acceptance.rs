//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use cc_flows::variant::names;
use cc_flows::{load_problems, Band, CcEnv, FlowVariant, Problem, Runner, Script, Source, Split, VariantSettings};
use chrono::NaiveDate;
use flows_core::atomic::{FIXED_REPLY, SCRIPTED_REPLY};
use flows_core::compose::{rounds_used, without_reserved, GeneratorCriticSpec, KeyMapping};
use flows_core::llm::LLM;
use flows_core::trace::{count_starts, first_divergence, normalize, read_trace, replay_backend};
use flows_core::{
    payload, Backend, EventKind, FlowConfig, Payload, Registry, RunContext, ScriptedBackend, TraceSink, Value,
};
use flows_eval::grid::{BackendFactory, GridSettings};
use flows_eval::report::{RESULTS_CSV, RESULTS_TEXT, TEMPORAL_CSV};
use flows_eval::table::ABSENT_CELL;
use flows_eval::temporal::{read_series_csv, write_series_csv, SeriesRow};
use flows_eval::{
    bootstrap_ci, evaluate_grid, render_results_table, sliding_window, Bootstrap, Bucket, RateMap, SolveRate,
};
use flows_sandbox::{format_report, run_tests, CandidateProgram, ExecutionLimits, TestCase, DEFAULT_ISSUE_TITLE};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

#[path = "../../eval/tests/common/oracle.rs"]
mod oracle;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixtures() -> PathBuf {
    root().join("fixtures")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, budget: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < budget, || format!("took {took:.1?}, budget {budget:?}"))
}

fn problems() -> Vec<Problem> {
    load_problems(&fixtures().join("dataset")).expect("fixture dataset")
}

fn scripted_factory() -> Box<BackendFactory> {
    let dir = fixtures().join("scripts");
    Box::new(move |p: &Problem, _| {
        let script = Script::load(&dir, &p.id).map_err(|e| e.to_string())?;
        Ok(Arc::new(script.backend()) as Arc<dyn Backend>)
    })
}

fn topology() -> Check {
    let start = Instant::now();
    let text = std::fs::read_to_string(fixtures().join("topology_oracle.csv")).map_err(|e| e.to_string())?;
    let problems: BTreeMap<String, Problem> = problems().into_iter().map(|p| (p.id.clone(), p)).collect();
    let runner = Runner::new(CcEnv::default(), VariantSettings::default());
    let mut rows = 0;
    let mut variants = BTreeSet::new();
    for line in text.lines().skip(1).filter(|l| !l.is_empty()) {
        let cells: Vec<&str> = line.split(',').collect();
        let problem = &problems[cells[0]];
        let variant: FlowVariant = cells[1].parse().map_err(|e| format!("{e}"))?;
        let script = Script::load(&fixtures().join("scripts"), &problem.id).map_err(|e| e.to_string())?;
        let backend = Arc::new(script.backend());
        let trace = Arc::new(TraceSink::memory());
        let a = runner.solve(problem, variant, backend.clone(), None, trace.clone());
        let events = trace.events();
        let verdict = match (&a.verdict, &a.error) {
            (Some(v), None) => v.as_str().to_string(),
            _ => "error".to_string(),
        };
        let got = vec![
            verdict,
            a.rounds_used.to_string(),
            count_starts(&events, names::CODE_GENERATOR).to_string(),
            count_starts(&events, names::CODE_CRITIC).to_string(),
            count_starts(&events, names::PLAN_GENERATOR).to_string(),
            count_starts(&events, names::PLAN_CRITIC).to_string(),
            backend.call_count().to_string(),
        ];
        ensure(got == cells[2..], || format!("{} {variant}: got {got:?}, want {:?}", problem.id, &cells[2..]))?;
        rows += 1;
        variants.insert(variant);
    }
    ensure(rows == 54 && variants.len() == 9, || format!("{rows} rows over {} variants", variants.len()))?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("{rows} rows, 9 variants, {:.1?}", start.elapsed()))
}

fn sandbox_corpus() -> Check {
    #[derive(serde::Deserialize)]
    struct Corpus {
        tests: Vec<TestCase>,
        programs: Vec<Entry>,
    }
    #[derive(serde::Deserialize)]
    struct Entry {
        name: String,
        verdict: String,
    }
    let start = Instant::now();
    let dir = fixtures().join("sandbox");
    let corpus: Corpus = serde_json::from_str(&std::fs::read_to_string(dir.join("corpus.json")).unwrap()).unwrap();
    let limits = ExecutionLimits::new(Duration::from_secs(2), 256 * 1024 * 1024).unwrap();
    let mut verdicts = BTreeSet::new();
    for entry in &corpus.programs {
        let source = std::fs::read_to_string(dir.join(format!("programs/{}.py", entry.name))).unwrap();
        let report = run_tests(&CandidateProgram::python(source), &corpus.tests, &limits).map_err(|e| e.to_string())?;
        ensure(report.verdict.as_str() == entry.verdict, || {
            format!("{}: {} != {}", entry.name, report.verdict.as_str(), entry.verdict)
        })?;
        let snapshot = std::fs::read_to_string(dir.join(format!("snapshots/{}.txt", entry.name))).unwrap();
        ensure(report.summary == snapshot && format_report(&report, DEFAULT_ISSUE_TITLE) == snapshot, || {
            format!("{}: report differs from snapshot", entry.name)
        })?;
        verdicts.insert(report.verdict.as_str());
    }
    ensure(verdicts.len() == 5, || format!("verdicts covered: {verdicts:?}"))?;
    let all_text: String = corpus
        .programs
        .iter()
        .map(|e| std::fs::read_to_string(dir.join(format!("snapshots/{}.txt", e.name))).unwrap())
        .collect();
    ensure(
        all_text.contains("All of the executed tests passed.")
            && all_text.contains("The execution timed out, the solution is not efficient enough."),
        || "snapshot phrases missing".into(),
    )?;
    within(start, Duration::from_secs(30))?;
    Ok(format!("5 verdicts, {} snapshots, {:.1?}", corpus.programs.len(), start.elapsed()))
}

fn quiet(cases: u32) -> Config {
    Config {
        failure_persistence: None,
        ..Config::with_cases(cases)
    }
}

fn fixed_as(name: &str, key: &str, reply: &str) -> FlowConfig {
    FlowConfig::new(name, FIXED_REPLY).with_param("reply", reply).with_param("output_key", key)
}

fn scripted(name: &str, replies: Vec<Payload>) -> FlowConfig {
    FlowConfig::new(name, SCRIPTED_REPLY).with_param("replies", Value::List(replies.into_iter().map(Value::Map).collect()))
}

fn generator_replies(max_rounds: u32, stop_at: u32) -> Vec<Payload> {
    (1..=max_rounds)
        .map(|i| {
            let text = if i == stop_at { format!("draft {i}. Final answer.") } else { format!("draft {i}") };
            payload! {"answer" => text}
        })
        .collect()
}

fn run_root(config: &FlowConfig, input: Payload) -> (Payload, Vec<flows_core::TraceEvent>) {
    let registry = Arc::new(Registry::with_builtins());
    let ctx = RunContext::new(registry.clone(), Arc::new(TraceSink::memory()));
    let mut flow = registry.create_flow(config).expect("valid config");
    let out = flow.run_root(&ctx, input).expect("run succeeds");
    (out.into_payload(), ctx.trace().events())
}

fn call_law() -> Check {
    let start = Instant::now();
    let cases = 256;
    let mut runner = TestRunner::new(quiet(cases));
    runner
        .run(&(1u32..=6, 1u32..=8), |(max_rounds, stop_at)| {
            let gc = GeneratorCriticSpec::new(
                scripted("gen", generator_replies(max_rounds, stop_at)),
                fixed_as("critic", "feedback", "try again"),
                max_rounds,
            )
            .feedback(KeyMapping::identity(["feedback"]))
            .into_config("gc");
            let (out, events) = run_root(&gc, payload! {"problem" => "p"});
            let r = rounds_used(&out).unwrap();
            prop_assert_eq!(r, stop_at.min(max_rounds));
            prop_assert_eq!(count_starts(&events, "gen") as u32, r);
            prop_assert_eq!(count_starts(&events, "critic") as u32, r - 1);
            if max_rounds == 1 {
                let (bare, _) = run_root(&scripted("gen", generator_replies(1, stop_at)), payload! {"problem" => "p"});
                prop_assert_eq!(without_reserved(&out), bare);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    within(start, Duration::from_secs(10))?;
    Ok(format!("{cases} cases, {:.1?}", start.elapsed()))
}

fn statistics() -> Check {
    let path = fixtures().join("stats/outcomes.json");
    let raw: BTreeMap<String, String> = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    for (name, bits) in &raw {
        let outcomes = oracle::parse_bits(bits);
        let (lo, hi) = bootstrap_ci(&outcomes, 1000, 0.95, 42).map_err(|e| e.to_string())?;
        let (olo, ohi) = oracle::brute_force_ci(&outcomes, 1000, 0.95, 42);
        worst = worst.max((lo - olo).abs()).max((hi - ohi).abs());
        ensure(worst <= 0.05, || format!("{name}: ({lo}, {hi}) vs oracle ({olo}, {ohi})"))?;
    }
    for value in [true, false] {
        let (lo, hi) = bootstrap_ci(&[value; 40], 1000, 0.95, 42).map_err(|e| e.to_string())?;
        ensure(lo == hi, || format!("all-{value} interval ({lo}, {hi})"))?;
    }
    let width = |n: usize| {
        let (lo, hi) = bootstrap_ci(&oracle::bernoulli_half(n, 7), 1000, 0.95, 42).unwrap();
        hi - lo
    };
    let ratio = width(50) / width(200);
    ensure((1.6..=2.4).contains(&ratio), || format!("width ratio {ratio}"))?;
    Ok(format!("{} vectors, max deviation {worst:.2e} pp, width ratio {ratio:.2}", raw.len()))
}

fn table_grammar() -> Check {
    let rate = |point: f64, half: f64| SolveRate {
        n: 100,
        solved: 0,
        point,
        ci_low: Some(point - half),
        ci_high: Some(point + half),
    };
    let pre = Bucket { source: Source::Codeforces, split: Split::Pre, band: None };
    let post = Bucket { source: Source::Codeforces, split: Split::Post, band: None };
    let easy = Bucket { source: Source::Leetcode, split: Split::Pre, band: Some(Band::Easy) };
    let mut rates = RateMap::new();
    for (variant, bucket, point, half) in [
        ("Code", pre, 71.8, 11.0),
        ("Code", post, 26.9, 10.4),
        ("Code", easy, 97.8, 3.1),
        ("Code_Reflection", pre, 81.1, 9.7),
        ("Code_Reflection", post, 26.9, 10.4),
        ("Plan-Code", pre, 70.2, 11.1),
    ] {
        rates.insert((variant.to_string(), bucket), rate(point, half));
    }
    let variants: Vec<String> = ["Code", "Code_Reflection", "Plan-Code"].map(String::from).to_vec();
    let text = render_results_table(&rates, &variants, "Code").map_err(|e| e.to_string())?;
    let row = |name: &str| -> Vec<String> {
        text.lines()
            .find(|l| l.split(" | ").next().map(str::trim) == Some(name))
            .map(|l| l.split(" | ").skip(1).map(|c| c.trim().to_string()).collect())
            .unwrap_or_default()
    };
    let expect = [
        ("Code", ["71.8 ±11.0", "26.9 ±10.4", "97.8 ±3.1"]),
        ("Code_Reflection", ["+9.3 ±9.7", "+0.0 ±10.4", ABSENT_CELL]),
        ("Plan-Code", ["-1.6 ±11.1", ABSENT_CELL, ABSENT_CELL]),
    ];
    for (name, cells) in expect {
        let got = row(name);
        ensure(got == cells, || format!("{name}: {got:?} != {cells:?}\n{text}"))?;
    }
    Ok("baseline, signed delta and absent cells render exactly".into())
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let problems = problems();
    let runner = Runner::new(CcEnv::default(), VariantSettings::default());

    let p = problems.iter().find(|p| p.id == "cf-1002").unwrap();
    let variant: FlowVariant = "Code_Debug_Collab".parse().unwrap();
    let path = dir.path().join("trace.log");
    let script = Script::load(&fixtures().join("scripts"), &p.id).map_err(|e| e.to_string())?;
    let sink = Arc::new(TraceSink::create(&path).map_err(|e| e.to_string())?);
    runner.solve(p, variant, Arc::new(script.backend()), None, sink);
    let recorded = read_trace(&path).map_err(|e| e.to_string())?;
    let replayed = TraceSink::memory();
    let replayed = Arc::new(replayed);
    runner.solve(p, variant, Arc::new(replay_backend(&path).map_err(|e| e.to_string())?), None, replayed.clone());
    if let Some(diff) = first_divergence(&normalize(&recorded), &normalize(&replayed.events())) {
        return Err(format!("(a) replay diverged: {diff}"));
    }

    let variants = FlowVariant::SUITE.to_vec();
    let factory = scripted_factory();
    let grid = |workers: usize| {
        let settings = GridSettings {
            run_dir: dir.path().join(format!("w{workers}")),
            workers,
            resume: false,
            cache: None,
        };
        evaluate_grid(&problems, &variants, &runner, &*factory, &settings).map_err(|e| e.to_string())
    };
    let strip = |records: Vec<flows_eval::RunRecord>| records.iter().map(|r| r.without_timing()).collect::<Vec<_>>();
    let serial = strip(grid(1)?.records);
    let parallel = strip(grid(4)?.records);
    ensure(serial.len() == 54, || format!("(b) {} records", serial.len()))?;
    if let Some(i) = (0..serial.len()).find(|&i| serial[i] != parallel[i]) {
        return Err(format!("(b) record {i} differs: {:?} vs {:?}", serial[i], parallel[i]));
    }

    let mut props = TestRunner::new(quiet(64));
    props
        .run(&proptest::collection::vec(any::<bool>(), 1..12), |order| {
            let tree = |tag: &str| {
                let gen = FlowConfig::new("gen", LLM)
                    .with_param("system_message", tag)
                    .with_param("query_message", "{{problem}}")
                    .with_param("human_message", "{{feedback}}");
                let critic = scripted("critic", (0..40).map(|i| payload! {"feedback" => i as i64}).collect());
                GeneratorCriticSpec::new(gen, critic, 3).feedback(KeyMapping::identity(["feedback"])).into_config(tag)
            };
            let registry = Arc::new(Registry::with_builtins());
            let ctx = |tag: &str| {
                let backend = ScriptedBackend::new((0..100).map(|i| format!("{tag} {i}")));
                RunContext::new(registry.clone(), Arc::new(TraceSink::memory())).with_backend(Arc::new(backend))
            };
            let (ctx_f, ctx_g) = (ctx("f"), ctx("g"));
            let mut f = registry.create_flow(&tree("f")).unwrap();
            let mut g = registry.create_flow(&tree("g")).unwrap();
            for run_f in order {
                let (runner, other, ctx) = if run_f { (&mut f, &g, &ctx_f) } else { (&mut g, &f, &ctx_g) };
                let before = other.tree_snapshot();
                runner.run_root(ctx, payload! {"problem" => "p", "feedback" => "start"}).unwrap();
                prop_assert_eq!(before, other.tree_snapshot());
                let owned: BTreeSet<_> = runner.tree_snapshot().keys().cloned().collect();
                for e in ctx.trace().events().iter().filter(|e| e.kind == EventKind::StateUpdate) {
                    prop_assert!(owned.contains(&e.instance_id));
                }
            }
            Ok(())
        })
        .map_err(|e| format!("(c) {e}"))?;
    Ok("(a) replay identical, (b) 54 records equal at 1 and 4 workers, (c) 64 interleavings isolated".into())
}

fn temporal() -> Check {
    let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).unwrap();
    let boundary = d(2021, 9, 1);
    let mut dated = Vec::new();
    for month in 1..=8 {
        for i in 0..10 {
            dated.push((d(2021, month, 1 + i), i < 8));
        }
    }
    for (y, m) in [(2021, 9), (2021, 10), (2021, 11), (2021, 12), (2022, 1), (2022, 2)] {
        for i in 0..4 {
            dated.push((d(y, m, 3 + i), i == 0));
        }
    }
    let points = sliding_window(&dated, 2, 1, Some(&Bootstrap::default())).map_err(|e| e.to_string())?;
    for p in &points {
        let rate = p.rate.point;
        if p.window_end <= boundary {
            ensure((rate - 80.0).abs() < 1e-9, || format!("pre window {p:?}"))?;
        } else if p.window_start >= boundary {
            ensure((rate - 25.0).abs() < 1e-9, || format!("post window {p:?}"))?;
        } else {
            ensure(rate < 80.0 && rate > 25.0, || format!("boundary window {p:?}"))?;
        }
    }
    ensure(points.windows(2).all(|w| w[1].rate.point <= w[0].rate.point), || "series not monotone".into())?;
    let rows: Vec<SeriesRow> = points.iter().map(|p| SeriesRow::new("Code", p)).collect();
    let csv = write_series_csv(&rows).map_err(|e| e.to_string())?;
    let back = read_series_csv(&csv).map_err(|e| e.to_string())?;
    ensure(back == rows, || "csv round trip changed rows".into())?;
    ensure(back.iter().map(SeriesRow::to_point).collect::<Vec<_>>() == points, || "points changed".into())?;
    Ok(format!("{} windows, 80.0 to 25.0, csv lossless", points.len()))
}

fn flows(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_flows"))
        .current_dir(root())
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    ensure(out.status.success(), || {
        format!("flows {args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(stdout)
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_default()
}

fn end_to_end() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("run");
    let out_arg = out.to_str().unwrap();
    let dataset = fixtures().join("dataset");
    let dataset = dataset.to_str().unwrap();
    let args = ["eval", "--dataset", dataset, "--out", out_arg, "--workers", "4", "--backend-profile", "scripted"];
    let first = flows(&args)?;
    let records = std::fs::read_to_string(out.join("records.jsonl")).map_err(|e| e.to_string())?;
    ensure(records.lines().count() == 54, || format!("{} records", records.lines().count()))?;
    ensure(first.contains("54 new runs"), || first.clone())?;
    let second = flows(&args)?;
    ensure(second.contains("0 new runs"), || second.clone())?;
    let files = [RESULTS_TEXT, RESULTS_CSV, TEMPORAL_CSV];
    let before: Vec<Vec<u8>> = files.iter().map(|f| read(&out, f)).collect();
    ensure(before.iter().all(|b| !b.is_empty()), || "report files missing".into())?;
    for f in files {
        std::fs::remove_file(out.join(f)).map_err(|e| e.to_string())?;
    }
    flows(&["report", out_arg])?;
    let after: Vec<Vec<u8>> = files.iter().map(|f| read(&out, f)).collect();
    ensure(before == after, || "report output differs from eval output".into())?;
    Ok("54 records, resume ran 0 new, report byte-identical".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("topology fixture suite", topology),
        ("sandbox golden corpus", sandbox_corpus),
        ("generator-critic call law", call_law),
        ("statistics oracle", statistics),
        ("reporting format", table_grammar),
        ("determinism and isolation", determinism),
        ("temporal analysis", temporal),
        ("end-to-end CLI", end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
