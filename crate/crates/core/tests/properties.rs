mod common;

use common::*;
use proptest::prelude::*;

fn ok(c: Check) -> Result<(), TestCaseError> {
    c.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn schedules_obey_the_rules_and_are_earliest(seed in any::<u64>()) {
        ok(check_trip_schedule(seed))?;
    }

    #[test]
    fn single_legs_match_exhaustive_search(seed in any::<u64>()) {
        ok(check_leg(seed))?;
    }

    #[test]
    fn incremental_insertion_matches_resimulation(seed in any::<u64>()) {
        ok(check_insertion_consistency(seed))?;
    }

    #[test]
    fn destroy_and_repair_keep_a_partition(seed in any::<u64>()) {
        ok(check_destroy_repair(seed))?;
    }

    #[test]
    fn random_solutions_are_lp_feasible(seed in any::<u64>()) {
        let inst = micro(seed);
        let sol = random_solution(&inst, &mut rng(seed ^ 0x1f));
        ok(check_lp(&inst, &sol).map_err(|e| format!("seed {seed}: {e}")))?;
    }

    #[test]
    fn arc_filter_keeps_the_optimum(seed in any::<u64>()) {
        ok(check_arc_filter(seed))?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn search_invariants(seed in any::<u64>()) {
        ok(check_search(seed, 300))?;
    }

    #[test]
    fn mixed_never_exceeds_all_sm(seed in any::<u64>()) {
        ok(check_mixed_vs_all_sm(seed, 300))?;
    }
}
