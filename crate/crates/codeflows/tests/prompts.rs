use cc_flows::prompts::*;

mod common;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(common::fixtures().join("prompts").join(format!("{name}.txt"))).expect("prompt fixture")
}

#[test]
fn listing_templates_are_bit_exact() {
    let cases = [
        ("code_system", CODE_SYSTEM),
        ("code_query", CODE_QUERY),
        ("code_human", CODE_HUMAN),
        ("code_reflection_reply", CODE_REFLECTION_REPLY),
        ("code_collab_human", CODE_COLLAB_HUMAN),
        ("code_critic_system", CODE_CRITIC_SYSTEM),
        ("code_critic_query", CODE_CRITIC_QUERY),
        ("code_debug_human", CODE_DEBUG_HUMAN),
        ("debug_critic_system", DEBUG_CRITIC_SYSTEM),
        ("debug_critic_query", DEBUG_CRITIC_QUERY),
        ("plan_system", PLAN_SYSTEM),
        ("plan_query", PLAN_QUERY),
    ];
    for (name, text) in cases {
        assert_eq!(text, fixture(name), "{name}");
    }
}

#[test]
fn role_needles_identify_exactly_one_system_message() {
    let systems = [CODE_SYSTEM, PLAN_SYSTEM, CODE_CRITIC_SYSTEM, PLAN_CRITIC_SYSTEM, DEBUG_CRITIC_SYSTEM];
    let needles = [CODE_ROLE_NEEDLE, PLAN_ROLE_NEEDLE, CODE_CRITIC_NEEDLE, PLAN_CRITIC_NEEDLE, DEBUG_CRITIC_NEEDLE];
    for (i, needle) in needles.iter().enumerate() {
        let hits: Vec<usize> = (0..systems.len()).filter(|j| systems[*j].contains(needle)).collect();
        assert_eq!(hits, vec![i], "needle `{needle}`");
    }
}
