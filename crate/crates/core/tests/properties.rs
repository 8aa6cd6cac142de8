mod common;

use common::{brute_f, hard_cost, tiny_instance};
use proptest::prelude::*;
use viral_discount::adaptive::{
    greedy_policy_step, run_policy, trial_realization, BranchEstimate, EnhancedGreedyPolicy, GreedyPolicy,
    IteratedPolicy, Policy, Session,
};
use viral_discount::cascade::{format_realization, parse_realization, SpreadEstimator};
use viral_discount::io::{format_adoption, format_graph, parse_adoption, parse_graph};
use viral_discount::nonadaptive::{
    config_cost, f_exact, hill_climbing, BudgetMode, BudgetSpec, ExactCaps, ExactEvaluator, GreedyRule,
    HillClimbOptions,
};
use viral_discount::Error;

fn policies() -> Vec<Box<dyn Policy>> {
    let exact = SpreadEstimator::default();
    vec![
        Box::new(GreedyPolicy::new(exact)),
        Box::new(EnhancedGreedyPolicy::new(exact, BranchEstimate::Rollouts { count: 30, seed: 1 })),
        Box::new(IteratedPolicy::new(exact, BranchEstimate::Rollouts { count: 30, seed: 2 })),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rejections_are_free_and_reveal_nothing(seed in any::<u64>(), scale in 0.5f64..4.0) {
        let inst = tiny_instance(seed, 6, 8, 3);
        let budget = inst.menu.d_max() * scale;
        let (s, d) = trial_realization(&inst, seed, 0);
        let mut session = Session::new(&inst, budget, &s, &d);
        let estimator = SpreadEstimator::default();
        while let Some(pair) = greedy_policy_step(session.state(), &inst, &estimator).unwrap() {
            let before = session.state().clone();
            let accepted = session.probe(pair).unwrap();
            let after = session.state();
            prop_assert_eq!(accepted, s.accepts(pair.node, pair.level));
            if !accepted {
                prop_assert_eq!(before.remaining_budget(), after.remaining_budget());
                prop_assert_eq!(before.observation().influenced(), after.observation().influenced());
                prop_assert!(!after.is_available(pair));
            } else {
                prop_assert!(after.observation().is_influenced(pair.node));
            }
            prop_assert!(after.spent() <= budget + 1e-9);
        }
        // Unavailable or unaffordable probes are refused.
        for pair in inst.all_pairs() {
            if !session.state().is_available(pair) || !session.state().can_afford(inst.rate(pair)) {
                prop_assert!(matches!(session.probe(pair), Err(Error::ContractViolation(_))));
            }
        }
    }

    #[test]
    fn trajectories_replay_bit_exactly(seed in any::<u64>(), scale in 0.5f64..3.0) {
        let inst = tiny_instance(seed, 6, 8, 2);
        let spec = BudgetSpec::hard(inst.menu.d_max() * scale).unwrap();
        let (s, d) = trial_realization(&inst, seed, 1);
        // through the text form as well
        let text = format_realization(&inst, &s, &d);
        let (s2, d2) = parse_realization(&text, "replay", &inst).unwrap();
        prop_assert_eq!(&d, &d2);
        for policy in policies() {
            let a = run_policy(policy.as_ref(), &inst, &spec, &s, &d).unwrap();
            let b = run_policy(policy.as_ref(), &inst, &spec, &s2, &d2).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(a.within_budget());
            prop_assert_eq!(a.cascade_size, a.influenced.len());
        }
    }

    #[test]
    fn greedy_commits_at_the_minimum_accepted_rate(seed in any::<u64>(), trial in 0u64..50) {
        let inst = tiny_instance(seed, 6, 8, 3);
        let spec = BudgetSpec::hard(inst.menu.d_max() * 2.0).unwrap();
        let (s, d) = trial_realization(&inst, seed, trial);
        let rec = run_policy(&GreedyPolicy::default(), &inst, &spec, &s, &d).unwrap();
        for pair in rec.accepted() {
            prop_assert_eq!(Some(pair.level), s.min_level(pair.node));
        }
    }

    #[test]
    fn hill_climbing_is_feasible_and_reports_its_exact_value(
        seed in any::<u64>(),
        budget in 0.1f64..4.0,
        soft in any::<bool>(),
        literal in any::<bool>(),
    ) {
        let inst = tiny_instance(seed, 5, 6, 2);
        let mode = if soft { BudgetMode::Soft } else { BudgetMode::Hard };
        let spec = BudgetSpec::new(budget, mode).unwrap();
        let eval = ExactEvaluator::new(&inst, ExactCaps::default());
        let rule = if literal { GreedyRule::LiteralTotal } else { GreedyRule::Marginal };
        let lazy = hill_climbing(&inst, &spec, &eval, HillClimbOptions { rule, lazy: true }).unwrap();
        let plain = hill_climbing(&inst, &spec, &eval, HillClimbOptions { rule, lazy: false }).unwrap();
        prop_assert_eq!(&lazy.config, &plain.config);
        prop_assert!(spec.admits(config_cost(&lazy.config, &inst, &spec)));
        if !soft {
            prop_assert!(hard_cost(&lazy.config, &inst) <= budget + 1e-9);
        }
        let v = f_exact(&lazy.config, &inst, ExactCaps::default()).unwrap();
        prop_assert!((v - lazy.value).abs() < 1e-9);
        prop_assert!((brute_f(&lazy.config, &inst) - v).abs() < 1e-9);
    }

    #[test]
    fn instance_files_round_trip(seed in any::<u64>()) {
        let inst = tiny_instance(seed, 6, 8, 3);
        let (labels, graph) = parse_graph(&format_graph(&inst), "g").unwrap();
        let model = parse_adoption(&format_adoption(&inst), "a", &labels, &inst.menu).unwrap();
        prop_assert_eq!(labels, inst.labels.clone());
        prop_assert_eq!(graph, inst.graph.clone());
        prop_assert_eq!(model, inst.model.clone());
    }
}

#[test]
fn universal_rejection_costs_nothing() {
    let inst = tiny_instance(5, 5, 6, 2);
    let top = inst.menu.max_level();
    let mut table = Vec::new();
    for _ in 0..inst.node_count() {
        table.extend([0.2, 0.7]);
    }
    let model = viral_discount::AdoptionModel::new(inst.node_count(), 2, table).unwrap();
    let inst = viral_discount::Instance::new(inst.graph, inst.menu, model, inst.labels).unwrap();
    assert!(inst.model.prob(0, top) < 1.0);
    let s = viral_discount::cascade::SeedingRealization::from_thresholds(&inst.model, vec![1.0; inst.node_count()]).unwrap();
    let d = viral_discount::cascade::DiffusionRealization::all(&inst.graph, true);
    let spec = BudgetSpec::hard(inst.menu.d_max() * 3.0).unwrap();
    for policy in policies() {
        let rec = run_policy(policy.as_ref(), &inst, &spec, &s, &d).unwrap();
        assert_eq!(rec.cascade_size, 0);
        assert_eq!(rec.delivered_cost, 0.0);
        assert!(rec.probes.iter().all(|p| !p.accepted));
    }
}

#[test]
fn budget_below_the_cheapest_rate_gives_an_empty_trajectory() {
    let inst = tiny_instance(9, 5, 6, 2);
    let spec = BudgetSpec::hard(inst.menu.d_min() * 0.5).unwrap();
    let (s, d) = trial_realization(&inst, 0, 0);
    for policy in policies() {
        let rec = run_policy(policy.as_ref(), &inst, &spec, &s, &d).unwrap();
        assert!(rec.probes.is_empty());
        assert_eq!(rec.cascade_size, 0);
    }
}

#[test]
fn soft_budget_is_refused_for_adaptive_policies() {
    let inst = tiny_instance(9, 5, 6, 2);
    let spec = BudgetSpec::new(2.0, BudgetMode::Soft).unwrap();
    let (s, d) = trial_realization(&inst, 0, 0);
    assert!(matches!(
        run_policy(&GreedyPolicy::default(), &inst, &spec, &s, &d),
        Err(Error::InvalidParameter(_))
    ));
}
