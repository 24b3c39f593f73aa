use std::collections::BTreeMap;

use flows_eval::stats::{bootstrap_ci_sequential, percentile};
use flows_eval::{bootstrap_ci, pass_at_1, solve_rate, Bootstrap, StatsError};
use proptest::prelude::*;

#[path = "common/oracle.rs"]
mod oracle;

fn fixture_vectors() -> BTreeMap<String, Vec<bool>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/stats/outcomes.json");
    let raw: BTreeMap<String, String> = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    raw.into_iter().map(|(k, v)| (k, oracle::parse_bits(&v))).collect()
}

#[test]
fn oracle_generator_matches_reference_values() {
    let mut sm = oracle::SplitMix(1477776061723855037);
    assert_eq!(sm.next(), 1985237415132408290);
    assert_eq!(sm.next(), 2979275885539914483);
}

#[test]
fn committed_vectors_match_brute_force() {
    for (name, outcomes) in fixture_vectors() {
        let (lo, hi) = bootstrap_ci(&outcomes, 1000, 0.95, 42).unwrap();
        let (olo, ohi) = oracle::brute_force_ci(&outcomes, 1000, 0.95, 42);
        assert!((lo - olo).abs() <= 0.05 && (hi - ohi).abs() <= 0.05, "{name}: ({lo}, {hi}) vs ({olo}, {ohi})");
    }
}

#[test]
fn sequential_and_default_paths_agree() {
    for outcomes in fixture_vectors().values() {
        assert_eq!(bootstrap_ci(outcomes, 300, 0.9, 5), bootstrap_ci_sequential(outcomes, 300, 0.9, 5));
    }
}

#[test]
fn pass_at_1_examples() {
    assert_eq!(pass_at_1(&[true; 10]).unwrap().point, 100.0);
    assert_eq!(pass_at_1(&[false; 10]).unwrap().point, 0.0);
    let mut v = vec![true; 18];
    v.extend([false; 49]);
    assert_eq!(format!("{:.1}", pass_at_1(&v).unwrap().point), "26.9");
    assert_eq!(pass_at_1(&[]), Err(StatsError::Empty));
}

#[test]
fn degenerate_vectors_have_zero_width() {
    assert_eq!(bootstrap_ci(&[true; 25], 1000, 0.95, 42).unwrap(), (100.0, 100.0));
    assert_eq!(bootstrap_ci(&[false; 25], 1000, 0.95, 42).unwrap(), (0.0, 0.0));
}

#[test]
fn half_of_thirty_straddles_fifty() {
    let outcomes = &fixture_vectors()["half_30"];
    assert_eq!(outcomes.iter().filter(|b| **b).count(), 15);
    let (lo, hi) = bootstrap_ci(outcomes, 1000, 0.95, 42).unwrap();
    assert!(lo < 50.0 && hi > 50.0);
    let normal = 2.0 * 1.96 * (0.25f64 / 30.0).sqrt() * 100.0;
    assert!(((hi - lo) - normal).abs() <= 0.25 * normal, "width {} vs {normal}", hi - lo);
}

#[test]
fn width_scales_with_inverse_root_n() {
    let width = |n: usize| {
        let (lo, hi) = bootstrap_ci(&oracle::bernoulli_half(n, 7), 1000, 0.95, 42).unwrap();
        hi - lo
    };
    let ratio = width(50) / width(200);
    assert!((1.6..=2.4).contains(&ratio), "ratio {ratio}");
}

#[test]
fn percentile_matches_oracle_on_rates() {
    let outcomes = &fixture_vectors()["tiny_5"];
    let mut rates = oracle::resampled_rates(outcomes, 101, 3);
    rates.sort_by(f64::total_cmp);
    assert_eq!(percentile(&rates, 0.5), rates[50]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interval_contains_point_and_is_bounded(
        outcomes in prop::collection::vec(any::<bool>(), 1..60),
        seed in any::<u64>(),
        level in 0.5f64..0.99,
    ) {
        let b = Bootstrap { resamples: 200, level, seed };
        let rate = solve_rate(&outcomes, &b).unwrap();
        let (lo, hi) = (rate.ci_low.unwrap(), rate.ci_high.unwrap());
        prop_assert!(0.0 <= lo && lo <= rate.point && rate.point <= hi && hi <= 100.0);
        prop_assert_eq!(solve_rate(&outcomes, &b).unwrap(), rate);
    }

    #[test]
    fn agrees_with_oracle_everywhere(
        outcomes in prop::collection::vec(any::<bool>(), 1..40),
        seed in any::<u64>(),
    ) {
        let (lo, hi) = bootstrap_ci(&outcomes, 100, 0.9, seed).unwrap();
        let (olo, ohi) = oracle::brute_force_ci(&outcomes, 100, 0.9, seed);
        prop_assert!((lo - olo).abs() < 1e-9 && (hi - ohi).abs() < 1e-9);
    }
}
