mod common;

use common::{brute_f, brute_spread, hard_cost, tiny_instance};
use viral_discount::adaptive::{
    evaluate_policy, for_each_consistent_realization, optimal_policy_oracle, run_policy, trial_realization,
    BranchEstimate, EnhancedGreedyPolicy, EvaluationMode, GreedyPolicy, IteratedPolicy, OracleCaps, PolicyState,
};
use viral_discount::cascade::{spread_exact, spread_mc, SpreadEstimator};
use viral_discount::instances;
use viral_discount::nonadaptive::{
    brute_force_config, f_exact, f_mc, hill_climbing, BudgetMode, BudgetSpec, Configuration, ExactCaps,
    ExactEvaluator, HillClimbOptions, DEFAULT_SEARCH_CAP,
};
use viral_discount::rng::RngStream;
use viral_discount::SeedDiscountPair;

const EXHAUSTIVE: EvaluationMode = EvaluationMode::Exhaustive { cap: 1 << 20 };

fn cfg(pairs: &[(usize, usize)]) -> Configuration {
    pairs.iter().map(|&(v, l)| SeedDiscountPair::new(v, l)).collect()
}

#[test]
fn fig1_single_node_spreads_by_hand() {
    let g = instances::fig1().graph;
    // I(d) = 1 + 0.1; I(b) = 1 + 0.5 * 1.1; I(a) = 1 + E[|reached among b, c, d, e|].
    let hand = [1.609, 1.55, 1.55, 1.1, 1.0];
    for (v, &h) in hand.iter().enumerate() {
        assert!((spread_exact(&g, &[v], 25).unwrap() - h).abs() < 1e-12);
        assert!((brute_spread(&g, &[v]) - h).abs() < 1e-12);
    }
}

#[test]
fn fig1_two_pair_configuration_by_hand() {
    let inst = instances::fig1();
    // Four equally likely seed sets: {a, b}, {a}, {b}, {}.
    let i_ab: f64 = 2.0 + 0.2 + (1.0 - 0.5 * (1.0 - 0.2 * 0.5)) * 1.1;
    assert!((i_ab - 2.805).abs() < 1e-12);
    let hand: f64 = (i_ab + 1.609 + 1.55 + 0.0) / 4.0;
    assert!((hand - 1.491).abs() < 1e-12);
    let s2 = cfg(&[(0, 0), (1, 0)]);
    assert!((f_exact(&s2, &inst, ExactCaps::default()).unwrap() - hand).abs() < 1e-12);
    assert!((brute_f(&s2, &inst) - hand).abs() < 1e-12);
}

#[test]
fn spread_exact_matches_live_edge_enumeration() {
    for seed in 0..200 {
        let inst = tiny_instance(seed, 6, 9, 2);
        let n = inst.node_count();
        for v in 0..n {
            let seeds: Vec<usize> = (0..n).filter(|&u| u == v || (u * 7 + seed as usize).is_multiple_of(3)).collect();
            let a = spread_exact(&inst.graph, &seeds, 25).unwrap();
            let b = brute_spread(&inst.graph, &seeds);
            assert!((a - b).abs() < 1e-9, "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn f_exact_matches_seed_set_enumeration() {
    for seed in 0..100 {
        let inst = tiny_instance(seed, 5, 6, 2);
        for (i, pair) in inst.all_pairs().enumerate() {
            let mut config = Configuration::new();
            for (j, q) in inst.all_pairs().enumerate() {
                if (i + j * 3) % 4 == 0 {
                    config.insert(q);
                }
            }
            config.insert(pair);
            let a = f_exact(&config, &inst, ExactCaps::default()).unwrap();
            let b = brute_f(&config, &inst);
            assert!((a - b).abs() < 1e-9, "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn monte_carlo_estimates_track_exact_values() {
    let inst = instances::fig1();
    let stream = RngStream::new(99);
    let mc = spread_mc(&inst.graph, &[0], 200_000, &stream);
    assert!((mc - 1.609).abs() < 0.01, "{mc}");
    let s2 = cfg(&[(0, 0), (1, 0)]);
    let mc = f_mc(&s2, &inst, 200_000, &stream);
    assert!((mc - 1.491).abs() < 0.015, "{mc}");
}

#[test]
fn hill_climbing_matches_brute_force_on_fig1_budgets() {
    let inst = instances::fig1();
    for budget in [1.0, 2.0, 3.0, 4.0, 5.0] {
        let spec = BudgetSpec::hard(budget).unwrap();
        let eval = ExactEvaluator::new(&inst, ExactCaps::default());
        let hc = hill_climbing(&inst, &spec, &eval, HillClimbOptions::default()).unwrap();
        let (_, opt) = brute_force_config(&inst, &spec, ExactCaps::default(), DEFAULT_SEARCH_CAP).unwrap();
        assert!(hc.cost <= budget + 1e-9);
        assert!(hc.value <= opt + 1e-9);
        assert!(hc.value >= 0.5 * (1.0 - (-1.0f64).exp()) * opt - 1e-9);
    }
}

#[test]
fn brute_force_config_is_optimal_among_enumerated_configurations() {
    for seed in 0..30 {
        let inst = tiny_instance(seed, 3, 4, 2);
        let spec = BudgetSpec::hard(1.5).unwrap();
        let (best, value) = brute_force_config(&inst, &spec, ExactCaps::default(), DEFAULT_SEARCH_CAP).unwrap();
        assert!(hard_cost(&best, &inst) <= 1.5 + 1e-9);
        // every subset of pairs, normalized or not
        let pairs: Vec<_> = inst.all_pairs().collect();
        for mask in 0u32..(1 << pairs.len()) {
            let c: Configuration = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect();
            if hard_cost(&c, &inst) <= 1.5 + 1e-9 {
                assert!(brute_f(&c, &inst) <= value + 1e-9, "seed {seed}");
            }
        }
    }
}

#[test]
fn soft_budget_mode_charges_expected_cost() {
    let inst = instances::fig1();
    // p = 0.5 at rate 1: every node costs 0.5 in expectation.
    let spec = BudgetSpec::new(1.0, BudgetMode::Soft).unwrap();
    let eval = ExactEvaluator::new(&inst, ExactCaps::default());
    let hc = hill_climbing(&inst, &spec, &eval, HillClimbOptions::default()).unwrap();
    assert!(hc.cost <= 1.0 + 1e-9);
    let (_, opt) = brute_force_config(&inst, &spec, ExactCaps::default(), DEFAULT_SEARCH_CAP).unwrap();
    assert!(hc.value >= 0.5 * (1.0 - (-1.0f64).exp()) * opt - 1e-9);
}

#[test]
fn oracle_dominates_policies_and_configurations() {
    for seed in 0..25 {
        let inst = tiny_instance(1000 + seed, 4, 5, 2);
        let d_max = inst.menu.d_max();
        let spec = BudgetSpec::hard(d_max * 1.6).unwrap();
        let opt = optimal_policy_oracle(&inst, &spec, OracleCaps::default()).unwrap();
        let (_, best_config) = brute_force_config(&inst, &spec, ExactCaps::default(), DEFAULT_SEARCH_CAP).unwrap();
        assert!(opt >= best_config - 1e-9, "seed {seed}: {opt} < {best_config}");
        let exact = SpreadEstimator::default();
        let greedy = evaluate_policy(&GreedyPolicy::new(exact), &inst, &spec, EXHAUSTIVE).unwrap();
        let enhanced = EnhancedGreedyPolicy::new(exact, BranchEstimate::exhaustive());
        let enhanced = evaluate_policy(&enhanced, &inst, &spec, EXHAUSTIVE).unwrap();
        let iterated = IteratedPolicy::new(exact, BranchEstimate::exhaustive());
        let iterated = evaluate_policy(&iterated, &inst, &spec, EXHAUSTIVE).unwrap();
        for v in [greedy.mean, enhanced.mean, iterated.mean] {
            assert!(v <= opt + 1e-9, "seed {seed}: policy {v} above optimum {opt}");
        }
        assert_eq!(greedy.budget_violations + enhanced.budget_violations + iterated.budget_violations, 0);
    }
}

#[test]
fn oracle_with_ample_budget_equals_offering_everyone_the_top_rate() {
    for seed in 0..25 {
        let inst = tiny_instance(2000 + seed, 5, 6, 2);
        let spec = BudgetSpec::hard(inst.menu.d_max() * 6.0).unwrap();
        let opt = optimal_policy_oracle(&inst, &spec, OracleCaps::default()).unwrap();
        let top = inst.menu.max_level();
        let all: Configuration = (0..inst.node_count()).map(|v| SeedDiscountPair::new(v, top)).collect();
        assert!((opt - brute_f(&all, &inst)).abs() < 1e-9, "seed {seed}");
    }
}

#[test]
fn exhaustive_policy_value_matches_sampled_average() {
    let inst = tiny_instance(77, 5, 6, 2);
    let spec = BudgetSpec::hard(inst.menu.d_max() * 1.5).unwrap();
    let policy = GreedyPolicy::default();
    let exact = evaluate_policy(&policy, &inst, &spec, EXHAUSTIVE).unwrap();
    let sampled = evaluate_policy(&policy, &inst, &spec, EvaluationMode::Sampled { trials: 40_000, seed: 8 }).unwrap();
    // 40k trials of a cascade bounded by 5: standard error below 0.013.
    assert!((exact.mean - sampled.mean).abs() < 0.06, "{} vs {}", exact.mean, sampled.mean);
}

#[test]
fn posterior_mass_is_one_along_trajectories() {
    for seed in 0..20 {
        let inst = tiny_instance(3000 + seed, 5, 6, 2);
        let spec = BudgetSpec::hard(inst.menu.d_max() * 2.0).unwrap();
        let (s, d) = trial_realization(&inst, seed, 0);
        let rec = run_policy(&GreedyPolicy::default(), &inst, &spec, &s, &d).unwrap();
        // replay the probes, checking the posterior at every prefix
        let mut session = viral_discount::adaptive::Session::new(&inst, spec.budget, &s, &d);
        let check = |state: &PolicyState| {
            let mut mass = 0.0;
            for_each_consistent_realization(&inst, state, 1 << 20, |_, _, p| {
                mass += p;
                Ok(())
            })
            .unwrap();
            assert!((mass - 1.0).abs() < 1e-9, "seed {seed}: {mass}");
        };
        check(session.state());
        for p in &rec.probes {
            session.probe(p.pair).unwrap();
            check(session.state());
        }
    }
}
