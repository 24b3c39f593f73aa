use std::io::{Cursor, Write};
use std::sync::{Arc, Mutex};

use cc_flows::kinds::{PlanMode, SUMMARY_KEY, VERDICT_KEY};
use cc_flows::prompts::{CODE_ROLE_NEEDLE, DEBUG_CRITIC_NEEDLE};
use cc_flows::variant::names;
use cc_flows::{CcEnv, FlowVariant, Runner, Script, StreamConsole, VariantSettings};
use flows_core::trace::{count_kind, count_starts};
use flows_core::{EventKind, ScriptedBackend};
use flows_sandbox::{CandidateProgram, ExecutionLimits, Sandbox, Verdict};

mod common;

use common::{fixtures, problem, run_scripted, run_with};

struct Row {
    problem: String,
    variant: FlowVariant,
    verdict: String,
    counts: [usize; 6],
}

fn oracle() -> Vec<Row> {
    let text = std::fs::read_to_string(fixtures().join("topology_oracle.csv")).unwrap();
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 9, "{line}");
            let n = |i: usize| cells[i].parse::<usize>().unwrap();
            Row {
                problem: cells[0].into(),
                variant: cells[1].parse().unwrap(),
                verdict: cells[2].into(),
                counts: [n(3), n(4), n(5), n(6), n(7), n(8)],
            }
        })
        .collect()
}

#[test]
fn scripted_suite_matches_hand_derived_table() {
    let rows = oracle();
    assert_eq!(rows.len(), 6 * FlowVariant::SUITE.len());
    let mut mismatches = Vec::new();
    for row in rows {
        let run = run_scripted(&problem(&row.problem), row.variant);
        let a = &run.attempt;
        let verdict = match (&a.verdict, &a.error) {
            (Some(v), None) => v.as_str().to_string(),
            (None, Some(_)) => "error".to_string(),
            other => panic!("{} {}: inconsistent attempt {other:?}", row.problem, row.variant),
        };
        let counts = [
            a.rounds_used as usize,
            count_starts(&run.events, names::CODE_GENERATOR),
            count_starts(&run.events, names::CODE_CRITIC),
            count_starts(&run.events, names::PLAN_GENERATOR),
            count_starts(&run.events, names::PLAN_CRITIC),
            run.backend.call_count(),
        ];
        assert_eq!(count_kind(&run.events, EventKind::BackendCall), run.backend.call_count());
        assert_eq!(a.solved, verdict == "AllPassed");
        if verdict != row.verdict || counts != row.counts {
            mismatches.push(format!(
                "{} {}: got {verdict} {counts:?} ({:?}), want {} {:?}",
                row.problem, row.variant, a.error, row.verdict, row.counts
            ));
        }
    }
    assert!(mismatches.is_empty(), "{}", mismatches.join("\n"));
}

fn out_payload(event: &flows_core::TraceEvent) -> Option<&flows_core::Payload> {
    event.body.get("message")?.as_map()?.get("payload")?.as_map()
}

#[test]
fn debug_feedback_is_the_sandbox_report_of_the_previous_program() {
    let p = problem("cf-1002");
    let script = Script::load(&fixtures().join("scripts"), &p.id).unwrap();
    let first = cc_flows::extract_code(&script.code[0]).unwrap().source;
    let report = Sandbox::default()
        .run_tests(&CandidateProgram::python(first.as_str()), &p.public_examples, &ExecutionLimits::default())
        .unwrap();
    assert_eq!(report.verdict, Verdict::WrongAnswer);

    for name in ["Code_Debug", "Code_Debug_Collab"] {
        let run = run_scripted(&p, name.parse().unwrap());
        let requests = run.backend.requests();
        let coder: Vec<_> = requests
            .iter()
            .filter(|r| r.system_text().is_some_and(|s| s.contains(CODE_ROLE_NEEDLE)))
            .collect();
        assert_eq!(coder.len(), 2, "{name}");
        let last_user = &coder[1].turns.last().unwrap().content;
        if name == "Code_Debug" {
            assert!(last_user.contains(&report.summary), "{name}: {last_user}");
        } else {
            assert!(last_user.contains(&script.debug_critic[0]), "{name}: {last_user}");
            let critic = requests
                .iter()
                .find(|r| r.system_text().is_some_and(|s| s.contains(DEBUG_CRITIC_NEEDLE)))
                .expect("debug critic called");
            assert!(critic.turns.last().unwrap().content.contains(&report.summary));
        }
        let summaries: Vec<&str> = run
            .events
            .iter()
            .filter(|e| e.kind == EventKind::MessageOut)
            .filter_map(|e| out_payload(e)?.get(SUMMARY_KEY)?.as_str())
            .collect();
        assert_eq!(summaries.first(), Some(&report.summary.as_str()), "{name}");
        let verdicts: Vec<&str> = run
            .events
            .iter()
            .filter(|e| e.kind == EventKind::MessageOut)
            .filter_map(|e| out_payload(e)?.get(VERDICT_KEY)?.as_str())
            .collect();
        assert_eq!(verdicts.first(), Some(&"WrongAnswer"), "{name}");
    }
}

#[test]
fn passing_public_tests_is_not_solving() {
    let run = run_scripted(&problem("cf-1003"), "Code_Debug".parse().unwrap());
    assert_eq!(run.attempt.rounds_used, 1);
    assert_eq!(run.attempt.verdict, Some(Verdict::WrongAnswer));
    assert!(!run.attempt.solved);
}

#[test]
fn dataset_oracle_plan_reaches_the_coder() {
    let p = problem("cf-1001");
    let run = run_scripted(&p, "Plan_Oracle-Code".parse().unwrap());
    assert!(run.attempt.solved);
    let request = &run.backend.requests()[0];
    assert!(request.turns.last().unwrap().content.contains(p.human_plan.as_deref().unwrap()));
}

#[test]
fn dataset_oracle_plan_missing_is_an_error() {
    let run = run_scripted(&problem("lc-0005"), "Plan_Oracle-Code".parse().unwrap());
    let error = run.attempt.error.expect("error");
    assert!(error.contains("human_plan"), "{error}");
    assert!(!run.attempt.environment_error);
    assert_eq!(run.backend.call_count(), 0);
}

#[derive(Clone, Default)]
struct Shared(Arc<Mutex<Vec<u8>>>);

impl Write for Shared {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }
    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

fn interactive_runner(stdin: &str, out: Shared) -> Runner {
    let env = CcEnv {
        console: Some(Arc::new(StreamConsole::new(Cursor::new(stdin.to_string()), out))),
        ..CcEnv::default()
    };
    let settings = VariantSettings {
        plan_mode: PlanMode::Interactive,
        ..VariantSettings::default()
    };
    Runner::new(env, settings)
}

#[test]
fn interactive_oracle_plan_is_read_until_the_marker() {
    let out = Shared::default();
    let runner = interactive_runner("sort; two pointers\n<EOF>\nignored\n", out.clone());
    let p = problem("lc-0006");
    let backend = ScriptedBackend::new([common::py("print('2.0')")]);
    let run = run_with(&runner, &p, "Plan_Oracle-Code".parse().unwrap(), backend);
    assert_eq!(run.attempt.error, None);
    let request = &run.backend.requests()[0];
    let user = &request.turns.last().unwrap().content;
    assert!(user.contains("# Conceptual solution\nsort; two pointers"), "{user}");
    assert!(!user.contains("ignored"));
    let shown = String::from_utf8(out.0.lock().unwrap().clone()).unwrap();
    assert!(shown.contains(&p.problem_description));
    assert!(shown.contains("<EOF>"));
}

#[test]
fn interactive_empty_plan_is_an_error() {
    let runner = interactive_runner("\n<EOF>\n", Shared::default());
    let run = run_with(
        &runner,
        &problem("cf-1001"),
        "Plan_Oracle-Code".parse().unwrap(),
        ScriptedBackend::new(Vec::<String>::new()),
    );
    assert!(run.attempt.error.unwrap().contains("empty plan"));
}

#[test]
fn missing_script_is_reported() {
    assert!(Script::load(&fixtures().join("scripts"), "nope").is_err());
}
