use super::session::{Policy, PolicyState, Session};
use crate::cascade::{conditional_spread, SpreadEstimator};
use crate::error::Result;
use crate::graph::{Instance, NodeId, SeedDiscountPair};
use crate::nonadaptive::argmax_lowest;

/// Conditional spreads keyed by the size of the influenced set they were
/// computed under. The influenced set only grows, so a size change is a
/// complete invalidation signal within one trajectory.
#[derive(Clone, Debug, Default)]
pub struct DeltaCache {
    epoch: usize,
    values: Vec<Option<f64>>,
}

impl DeltaCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn get(
        &mut self,
        instance: &Instance,
        state: &PolicyState,
        v: NodeId,
        estimator: &SpreadEstimator,
    ) -> Result<f64> {
        let obs = state.observation();
        let epoch = obs.influenced_count();
        if self.values.len() != instance.node_count() || self.epoch != epoch {
            self.values.clear();
            self.values.resize(instance.node_count(), None);
            self.epoch = epoch;
        }
        if let Some(delta) = self.values[v] {
            return Ok(delta);
        }
        let delta = conditional_spread(&instance.graph, obs, v, estimator)?;
        self.values[v] = Some(delta);
        Ok(delta)
    }
}

/// The pair maximizing `Delta(v | psi) / d` among available, affordable
/// pairs; ties go to the lowest node, then the lowest rate. `None` when
/// nothing is affordable.
pub fn greedy_policy_step(
    state: &PolicyState,
    instance: &Instance,
    estimator: &SpreadEstimator,
) -> Result<Option<SeedDiscountPair>> {
    greedy_step_cached(state, instance, estimator, &mut DeltaCache::new())
}

pub fn greedy_step_cached(
    state: &PolicyState,
    instance: &Instance,
    estimator: &SpreadEstimator,
    cache: &mut DeltaCache,
) -> Result<Option<SeedDiscountPair>> {
    let mut scored = Vec::new();
    for v in 0..instance.node_count() {
        // The cheapest open level has the best ratio for its node, and if it
        // is unaffordable so is every dearer one.
        let Some(level) = state.lowest_open_level(v) else {
            continue;
        };
        let rate = instance.menu.rate(level);
        if !state.can_afford(rate) {
            continue;
        }
        let ratio = cache.get(instance, state, v, estimator)? / rate;
        scored.push((ratio, SeedDiscountPair::new(v, level)));
    }
    Ok(argmax_lowest(scored).map(|(_, pair)| pair))
}

/// Repeatedly probes the best spread-per-cost pair until nothing is
/// affordable.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GreedyPolicy {
    pub estimator: SpreadEstimator,
}

impl GreedyPolicy {
    pub fn new(estimator: SpreadEstimator) -> Self {
        GreedyPolicy { estimator }
    }
}

impl Policy for GreedyPolicy {
    fn name(&self) -> &'static str {
        "adaptive-greedy"
    }

    fn execute(&self, session: &mut Session<'_>) -> Result<()> {
        let mut cache = DeltaCache::new();
        while let Some(pair) =
            greedy_step_cached(session.state(), session.instance(), &self.estimator, &mut cache)?
        {
            session.probe(pair)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptive::run_policy;
    use crate::instances;
    use crate::nonadaptive::BudgetSpec;

    #[test]
    fn fig2_walkthrough() {
        let inst = instances::fig1();
        let (seeding, diffusion) = instances::fig2_realization(&inst);
        let spec = BudgetSpec::hard(2.0).unwrap();
        let rec = run_policy(&GreedyPolicy::default(), &inst, &spec, &seeding, &diffusion).unwrap();
        let probes: Vec<_> = rec.probes.iter().map(|p| (p.pair.node, p.pair.level, p.accepted)).collect();
        assert_eq!(probes, vec![(0, 0, true), (2, 0, false), (3, 0, true)]);
        assert_eq!(rec.influenced, vec![0, 1, 3, 4]);
        assert_eq!(rec.cascade_size, 4);
        assert_eq!(rec.delivered_cost, 2.0);
        assert_eq!(
            rec.log_lines(&inst),
            "probe a 1 accept a->b:live a->c:blocked b->d:blocked\n\
             probe c 1 reject\n\
             probe d 1 accept d->e:live\n"
        );
    }

    #[test]
    fn worst_case_greedy_spends_on_x() {
        let inst = instances::worstcase(10).unwrap();
        let seeding = crate::cascade::SeedingRealization::from_min_levels(
            &inst.model,
            &[Some(0), Some(1), Some(1), Some(1), Some(1), Some(1), Some(1), Some(1), Some(1), Some(1)],
        )
        .unwrap();
        let diffusion = crate::cascade::DiffusionRealization::all(&inst.graph, true);
        let spec = BudgetSpec::hard(1.0).unwrap();
        let rec = run_policy(&GreedyPolicy::default(), &inst, &spec, &seeding, &diffusion).unwrap();
        assert_eq!(rec.cascade_size, 1);
        assert_eq!(rec.accepted().collect::<Vec<_>>(), vec![SeedDiscountPair::new(0, 0)]);
    }
}
