use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::posterior::for_each_consistent_realization;
use super::session::{adaptive_budget, Policy, PolicyState, Session};
use crate::cascade::{hoeffding_radius, sample_diffusion, sample_seeding, DiffusionRealization, SeedingRealization, DEFAULT_DELTA};
use crate::error::Result;
use crate::graph::Instance;
use crate::nonadaptive::BudgetSpec;
use crate::rng::{tags, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvaluationMode {
    /// Mean over independently sampled realizations.
    Sampled { trials: usize, seed: u64 },
    /// Probability-weighted sum over every realization.
    Exhaustive { cap: u64 },
}

/// Expected cascade of a policy, `f(pi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyEvaluation {
    pub mean: f64,
    /// Hoeffding half-width at 95%; zero for exhaustive evaluation.
    pub radius: f64,
    /// Realizations the policy was run on.
    pub realizations: usize,
    pub exhaustive: bool,
    pub max_delivered_cost: f64,
    pub budget_violations: usize,
}

/// The realization of trial `i` under master seed `seed`.
pub fn trial_realization(instance: &Instance, seed: u64, i: u64) -> (SeedingRealization, DiffusionRealization) {
    let stream = RngStream::new(seed).substream(tags::TRIALS).substream(i);
    (
        sample_seeding(&instance.model, &stream),
        sample_diffusion(&instance.graph, &stream),
    )
}

struct Run {
    size: usize,
    cost: f64,
    violated: bool,
}

fn run_one(
    policy: &dyn Policy,
    instance: &Instance,
    budget: f64,
    seeding: &SeedingRealization,
    diffusion: &DiffusionRealization,
) -> Result<Run> {
    let mut session = Session::new(instance, budget, seeding, diffusion);
    policy.execute(&mut session)?;
    let rec = session.into_record();
    Ok(Run {
        size: rec.cascade_size,
        cost: rec.delivered_cost,
        violated: !rec.within_budget(),
    })
}

pub fn evaluate_policy(
    policy: &dyn Policy,
    instance: &Instance,
    spec: &BudgetSpec,
    mode: EvaluationMode,
) -> Result<PolicyEvaluation> {
    let budget = adaptive_budget(spec)?;
    match mode {
        EvaluationMode::Sampled { trials, seed } => {
            let runs = (0..trials as u64)
                .into_par_iter()
                .map(|i| {
                    let (s, d) = trial_realization(instance, seed, i);
                    run_one(policy, instance, budget, &s, &d)
                })
                .collect::<Result<Vec<_>>>()?;
            let total: u64 = runs.iter().map(|r| r.size as u64).sum();
            Ok(summarize(
                total as f64 / trials.max(1) as f64,
                hoeffding_radius(instance.node_count() as f64, trials.max(1), DEFAULT_DELTA),
                &runs,
                false,
            ))
        }
        EvaluationMode::Exhaustive { cap } => {
            let mut all = Vec::new();
            let initial = PolicyState::initial(instance, budget);
            for_each_consistent_realization(instance, &initial, cap as u128, |s, d, p| {
                all.push((s.clone(), d.clone(), p));
                Ok(())
            })?;
            let runs = all
                .par_iter()
                .map(|(s, d, _)| run_one(policy, instance, budget, s, d))
                .collect::<Result<Vec<_>>>()?;
            let mean = all.iter().zip(&runs).map(|((_, _, p), r)| p * r.size as f64).sum();
            Ok(summarize(mean, 0.0, &runs, true))
        }
    }
}

fn summarize(mean: f64, radius: f64, runs: &[Run], exhaustive: bool) -> PolicyEvaluation {
    PolicyEvaluation {
        mean,
        radius,
        realizations: runs.len(),
        exhaustive,
        max_delivered_cost: runs.iter().map(|r| r.cost).fold(0.0, f64::max),
        budget_violations: runs.iter().filter(|r| r.violated).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptive::{BranchEstimate, EnhancedGreedyPolicy, GreedyPolicy};
    use crate::cascade::SpreadEstimator;
    use crate::instances;

    #[test]
    fn worst_case_values() {
        let inst = instances::worstcase(10).unwrap();
        let spec = BudgetSpec::hard(1.0).unwrap();
        let mode = EvaluationMode::Exhaustive { cap: 1 << 20 };
        let g = evaluate_policy(&GreedyPolicy::default(), &inst, &spec, mode).unwrap();
        assert_eq!(g.realizations, 1);
        assert!((g.mean - 1.0).abs() < 1e-9);
        let e = EnhancedGreedyPolicy::new(SpreadEstimator::default(), BranchEstimate::exhaustive());
        let e = evaluate_policy(&e, &inst, &spec, mode).unwrap();
        assert!((e.mean - 9.0).abs() < 1e-9);
    }

    #[test]
    fn sampled_agrees_with_exhaustive_on_fig1() {
        let inst = instances::fig1();
        let spec = BudgetSpec::hard(2.0).unwrap();
        let exact = evaluate_policy(&GreedyPolicy::default(), &inst, &spec, EvaluationMode::Exhaustive { cap: 1 << 20 })
            .unwrap();
        let sampled = evaluate_policy(
            &GreedyPolicy::default(),
            &inst,
            &spec,
            EvaluationMode::Sampled { trials: 20_000, seed: 5 },
        )
        .unwrap();
        assert!((exact.mean - sampled.mean).abs() < 0.05, "{} vs {}", exact.mean, sampled.mean);
        assert_eq!(sampled.budget_violations, 0);
        assert!(sampled.max_delivered_cost <= 2.0);
    }
}
