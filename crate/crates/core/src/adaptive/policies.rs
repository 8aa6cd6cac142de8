use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::greedy::GreedyPolicy;
use super::posterior::{
    acceptance_probability, for_each_consistent_realization, sample_consistent_realization,
    DEFAULT_REALIZATION_CAP,
};
use super::session::{Policy, PolicyState, Session};
use crate::cascade::{conditional_spread, SpreadEstimator};
use crate::error::Result;
use crate::graph::{Instance, NodeId, SeedDiscountPair};
use crate::nonadaptive::argmax_lowest;
use crate::rng::{tags, RngStream};

/// How the expected gain of running greedy from a state is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BranchEstimate {
    /// Mean over `count` greedy runs on realizations drawn from the posterior.
    Rollouts { count: usize, seed: u64 },
    /// Exact expectation over every consistent realization.
    Exhaustive { cap: u64 },
}

impl Default for BranchEstimate {
    fn default() -> Self {
        BranchEstimate::Rollouts { count: 1000, seed: 0 }
    }
}

impl BranchEstimate {
    pub fn exhaustive() -> Self {
        BranchEstimate::Exhaustive {
            cap: DEFAULT_REALIZATION_CAP as u64,
        }
    }
}

type MemoKey = (u64, Vec<u64>);

/// Expected additional influence of continuing with greedy.
struct BranchEvaluator {
    greedy: GreedyPolicy,
    branch: BranchEstimate,
    memo: Mutex<HashMap<MemoKey, f64>>,
}

impl BranchEvaluator {
    fn new(estimator: SpreadEstimator, branch: BranchEstimate) -> Self {
        BranchEvaluator {
            greedy: GreedyPolicy::new(estimator),
            branch,
            memo: Mutex::new(HashMap::new()),
        }
    }

    fn greedy_gain(&self, instance: &Instance, state: &PolicyState) -> Result<f64> {
        let base = state.observation().influenced_count();
        match self.branch {
            BranchEstimate::Rollouts { count, seed } => {
                let stream = RngStream::new(seed)
                    .substream(tags::ROLLOUT)
                    .substream(state.observation().probes().len() as u64);
                let total = (0..count as u64)
                    .into_par_iter()
                    .map(|k| {
                        let (s, d) = sample_consistent_realization(instance, state, &stream.substream(k));
                        let mut session = Session::resume(instance, state.clone(), &s, &d);
                        self.greedy.execute(&mut session)?;
                        Ok((session.state().observation().influenced_count() - base) as u64)
                    })
                    .collect::<Result<Vec<u64>>>()?
                    .into_iter()
                    .sum::<u64>();
                Ok(total as f64 / count.max(1) as f64)
            }
            BranchEstimate::Exhaustive { cap } => {
                let key = (fingerprint(instance, state.budget()), state.key());
                if let Some(&v) = self.memo.lock().expect("memo lock").get(&key) {
                    return Ok(v);
                }
                let mut value = 0.0;
                for_each_consistent_realization(instance, state, cap as u128, |s, d, p| {
                    let mut session = Session::resume(instance, state.clone(), s, d);
                    self.greedy.execute(&mut session)?;
                    value += p * (session.state().observation().influenced_count() - base) as f64;
                    Ok(())
                })?;
                self.memo.lock().expect("memo lock").insert(key, value);
                Ok(value)
            }
        }
    }
}

/// Content hash of everything the greedy continuation depends on besides the
/// state, so one policy value can be reused across instances safely.
fn fingerprint(instance: &Instance, budget: f64) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    budget.to_bits().hash(&mut h);
    instance.node_count().hash(&mut h);
    for e in instance.graph.edges() {
        (e.source, e.target, e.prob.to_bits()).hash(&mut h);
    }
    for &d in instance.menu.rates() {
        d.to_bits().hash(&mut h);
    }
    for v in 0..instance.node_count() {
        for &p in instance.model.row(v) {
            p.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

/// Node with the largest conditional spread among those still open at the
/// top rate; ties go to the lowest node.
fn best_single(
    instance: &Instance,
    state: &PolicyState,
    estimator: &SpreadEstimator,
) -> Result<Option<(NodeId, f64)>> {
    let top = instance.menu.max_level();
    let mut scored = Vec::new();
    for v in 0..instance.node_count() {
        if state.is_available(SeedDiscountPair::new(v, top)) {
            scored.push((conditional_spread(&instance.graph, state.observation(), v, estimator)?, v));
        }
    }
    Ok(argmax_lowest(scored).map(|(spread, v)| (v, spread)))
}

/// Either offers the single most influential node the top rate, or runs
/// adaptive greedy, whichever is expected to influence more.
pub struct EnhancedGreedyPolicy {
    pub estimator: SpreadEstimator,
    pub branch: BranchEstimate,
    eval: BranchEvaluator,
}

impl EnhancedGreedyPolicy {
    pub fn new(estimator: SpreadEstimator, branch: BranchEstimate) -> Self {
        EnhancedGreedyPolicy {
            estimator,
            branch,
            eval: BranchEvaluator::new(estimator, branch),
        }
    }
}

impl Policy for EnhancedGreedyPolicy {
    fn name(&self) -> &'static str {
        "enhanced"
    }

    fn execute(&self, session: &mut Session<'_>) -> Result<()> {
        let instance = session.instance();
        let top = instance.menu.max_level();
        if !session.state().can_afford(instance.menu.d_max()) {
            return self.eval.greedy.execute(session);
        }
        let Some((v, spread)) = best_single(instance, session.state(), &self.estimator)? else {
            return Ok(());
        };
        let q = acceptance_probability(&instance.model, v, session.state().floor(v), top);
        if q * spread > self.eval.greedy_gain(instance, session.state())? {
            session.probe(SeedDiscountPair::new(v, top))?;
            Ok(())
        } else {
            self.eval.greedy.execute(session)
        }
    }
}

/// Keeps offering the top rate to the most influential remaining node while
/// that beats handing the rest of the budget to greedy.
pub struct IteratedPolicy {
    pub estimator: SpreadEstimator,
    pub branch: BranchEstimate,
    eval: BranchEvaluator,
}

impl IteratedPolicy {
    pub fn new(estimator: SpreadEstimator, branch: BranchEstimate) -> Self {
        IteratedPolicy {
            estimator,
            branch,
            eval: BranchEvaluator::new(estimator, branch),
        }
    }
}

impl Policy for IteratedPolicy {
    fn name(&self) -> &'static str {
        "iterated"
    }

    fn execute(&self, session: &mut Session<'_>) -> Result<()> {
        let instance = session.instance();
        let top = instance.menu.max_level();
        loop {
            let Some((v, spread)) = best_single(instance, session.state(), &self.estimator)? else {
                return Ok(());
            };
            if !session.state().can_afford(instance.menu.d_max()) {
                return self.eval.greedy.execute(session);
            }
            let q = acceptance_probability(&instance.model, v, session.state().floor(v), top);
            if q * spread > self.eval.greedy_gain(instance, session.state())? {
                session.probe(SeedDiscountPair::new(v, top))?;
            } else {
                return self.eval.greedy.execute(session);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptive::run_policy;
    use crate::cascade::{DiffusionRealization, SeedingRealization};
    use crate::instances;
    use crate::nonadaptive::BudgetSpec;

    fn worstcase_realization(inst: &Instance) -> (SeedingRealization, DiffusionRealization) {
        let mut levels = vec![Some(1); inst.node_count()];
        levels[0] = Some(0);
        (
            SeedingRealization::from_min_levels(&inst.model, &levels).unwrap(),
            DiffusionRealization::all(&inst.graph, true),
        )
    }

    #[test]
    fn enhanced_takes_the_clique_in_the_worst_case() {
        let inst = instances::worstcase(10).unwrap();
        let (s, d) = worstcase_realization(&inst);
        let spec = BudgetSpec::hard(1.0).unwrap();
        for branch in [BranchEstimate::exhaustive(), BranchEstimate::Rollouts { count: 50, seed: 3 }] {
            let policy = EnhancedGreedyPolicy::new(SpreadEstimator::default(), branch);
            let rec = run_policy(&policy, &inst, &spec, &s, &d).unwrap();
            assert_eq!(rec.cascade_size, 9);
            assert_eq!(rec.probes.len(), 1);
            assert_eq!(rec.probes[0].pair, SeedDiscountPair::new(1, 1));
        }
    }

    #[test]
    fn enhanced_falls_back_to_greedy_below_top_rate() {
        let inst = instances::fig1();
        let (s, d) = instances::fig2_realization(&inst);
        let spec = BudgetSpec::hard(1.5).unwrap();
        let enhanced = EnhancedGreedyPolicy::new(SpreadEstimator::default(), BranchEstimate::exhaustive());
        let a = run_policy(&enhanced, &inst, &spec, &s, &d).unwrap();
        let b = run_policy(&GreedyPolicy::default(), &inst, &spec, &s, &d).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn iterated_respects_budget_on_fig1() {
        let inst = instances::fig1();
        let (s, d) = instances::fig2_realization(&inst);
        let spec = BudgetSpec::hard(3.0).unwrap();
        let policy = IteratedPolicy::new(SpreadEstimator::default(), BranchEstimate::exhaustive());
        let rec = run_policy(&policy, &inst, &spec, &s, &d).unwrap();
        assert!(rec.within_budget());
        assert!(rec.cascade_size >= 1);
    }
}
