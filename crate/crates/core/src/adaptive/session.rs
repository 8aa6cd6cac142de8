//! Probe/respond/reveal execution of adaptive policies.

use std::fmt::Write as _;

use crate::cascade::{DiffusionRealization, PartialObservation, ProbeOutcome, SeedingRealization};
use crate::error::{Error, Result};
use crate::graph::{Instance, NodeId, SeedDiscountPair};
use crate::nonadaptive::{BudgetMode, BudgetSpec, BUDGET_TOLERANCE};

/// Everything a policy may condition on.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyState {
    budget: f64,
    spent: f64,
    /// Lowest level still worth offering to each node. A rejection at level
    /// `l` implies rejection at every level `<= l`.
    floor: Vec<usize>,
    levels: usize,
    observation: PartialObservation,
    committed: Vec<SeedDiscountPair>,
}

impl PolicyState {
    pub fn initial(instance: &Instance, budget: f64) -> Self {
        PolicyState {
            budget,
            spent: 0.0,
            floor: vec![0; instance.node_count()],
            levels: instance.menu.len(),
            observation: PartialObservation::new(&instance.graph),
            committed: Vec::new(),
        }
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Total rate of accepted offers so far.
    pub fn spent(&self) -> f64 {
        self.spent
    }

    pub fn remaining_budget(&self) -> f64 {
        self.budget - self.spent
    }

    pub fn can_afford(&self, rate: f64) -> bool {
        self.spent + rate <= self.budget + BUDGET_TOLERANCE
    }

    pub fn observation(&self) -> &PartialObservation {
        &self.observation
    }

    pub fn committed(&self) -> &[SeedDiscountPair] {
        &self.committed
    }

    /// Lowest offerable level of `v`, or `None` when `v` is influenced or has
    /// rejected every rate.
    pub fn lowest_open_level(&self, v: NodeId) -> Option<usize> {
        if self.observation.is_influenced(v) || self.floor[v] >= self.levels {
            None
        } else {
            Some(self.floor[v])
        }
    }

    /// Number of levels `v` has been seen to reject (all levels below the
    /// floor).
    pub fn floor(&self, v: NodeId) -> usize {
        self.floor[v]
    }

    pub fn is_available(&self, pair: SeedDiscountPair) -> bool {
        pair.level < self.levels
            && self.lowest_open_level(pair.node).is_some_and(|l| pair.level >= l)
    }

    /// Pairs a policy may still probe, ignoring the budget.
    pub fn available_pairs(&self) -> impl Iterator<Item = SeedDiscountPair> + '_ {
        (0..self.floor.len()).flat_map(move |v| {
            let start = self.lowest_open_level(v).unwrap_or(self.levels);
            (start..self.levels).map(move |l| SeedDiscountPair::new(v, l))
        })
    }

    /// Canonical encoding of the information state, for memoization.
    pub(crate) fn key(&self) -> Vec<u64> {
        let mut key = Vec::with_capacity(2 + self.floor.len());
        key.push(self.spent.to_bits());
        let mut word = 0u64;
        for (v, &influenced) in self.observation.influenced().iter().enumerate() {
            if influenced {
                word |= 1 << (v % 64);
            }
            if v % 64 == 63 {
                key.push(word);
                word = 0;
            }
        }
        key.push(word);
        for v in 0..self.floor.len() {
            key.push(if self.observation.is_influenced(v) { u64::MAX } else { self.floor[v] as u64 });
        }
        key
    }
}

/// One execution of a policy against a fixed realization.
pub struct Session<'a> {
    instance: &'a Instance,
    seeding: &'a SeedingRealization,
    diffusion: &'a DiffusionRealization,
    state: PolicyState,
}

impl<'a> Session<'a> {
    pub fn new(
        instance: &'a Instance,
        budget: f64,
        seeding: &'a SeedingRealization,
        diffusion: &'a DiffusionRealization,
    ) -> Self {
        Session::resume(instance, PolicyState::initial(instance, budget), seeding, diffusion)
    }

    /// Continues from `state` under a realization that must agree with it.
    pub fn resume(
        instance: &'a Instance,
        state: PolicyState,
        seeding: &'a SeedingRealization,
        diffusion: &'a DiffusionRealization,
    ) -> Self {
        Session {
            instance,
            seeding,
            diffusion,
            state,
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn state(&self) -> &PolicyState {
        &self.state
    }

    /// Offers `pair`. An accepted offer is paid for and its cascade revealed;
    /// a rejected one is free and closes every level up to the offered one.
    pub fn probe(&mut self, pair: SeedDiscountPair) -> Result<bool> {
        if pair.node >= self.instance.node_count() || !self.state.is_available(pair) {
            return Err(Error::ContractViolation(format!(
                "pair <{}, level {}> is not available",
                pair.node, pair.level
            )));
        }
        let rate = self.instance.rate(pair);
        if !self.state.can_afford(rate) {
            return Err(Error::ContractViolation(format!(
                "pair <{}, {}> exceeds the remaining budget {}",
                pair.node,
                rate,
                self.state.remaining_budget()
            )));
        }
        let accepted = self.seeding.accepts(pair.node, pair.level);
        self.state
            .observation
            .record_probe(&self.instance.graph, self.diffusion, pair, accepted)?;
        if accepted {
            self.state.spent += rate;
            self.state.committed.push(pair);
        } else {
            self.state.floor[pair.node] = pair.level + 1;
        }
        Ok(accepted)
    }

    pub fn into_state(self) -> PolicyState {
        self.state
    }

    pub fn into_record(self) -> TrajectoryRecord {
        let obs = &self.state.observation;
        TrajectoryRecord {
            budget: self.state.budget,
            probes: obs.probes().to_vec(),
            delivered_cost: self.state.spent,
            influenced: obs.influenced_nodes(),
            cascade_size: obs.influenced_count(),
        }
    }
}

/// A rule choosing probes from observations.
pub trait Policy: Sync {
    fn name(&self) -> &'static str;
    fn execute(&self, session: &mut Session<'_>) -> Result<()>;
}

/// Ordered probes and outcome of one policy run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub budget: f64,
    pub probes: Vec<ProbeOutcome>,
    /// Sum of accepted rates.
    pub delivered_cost: f64,
    pub influenced: Vec<NodeId>,
    pub cascade_size: usize,
}

impl TrajectoryRecord {
    pub fn accepted(&self) -> impl Iterator<Item = SeedDiscountPair> + '_ {
        self.probes.iter().filter(|p| p.accepted).map(|p| p.pair)
    }

    pub fn within_budget(&self) -> bool {
        self.delivered_cost <= self.budget + BUDGET_TOLERANCE
    }

    /// `probe <node> <rate> <accept|reject> <src>-><dst>:<live|blocked> ...`
    pub fn log_lines(&self, instance: &Instance) -> String {
        let mut out = String::new();
        for p in &self.probes {
            let _ = write!(
                out,
                "probe {} {} {}",
                instance.labels.name(p.pair.node),
                instance.rate(p.pair),
                if p.accepted { "accept" } else { "reject" }
            );
            for &(e, live) in &p.revealed {
                let edge = instance.graph.edge(e);
                let _ = write!(
                    out,
                    " {}->{}:{}",
                    instance.labels.name(edge.source),
                    instance.labels.name(edge.target),
                    if live { "live" } else { "blocked" }
                );
            }
            out.push('\n');
        }
        out
    }

    /// `step,node,rate,accepted,spent,influenced` rows with a header.
    pub fn csv(&self, instance: &Instance) -> String {
        let mut out = String::from("step,node,rate,accepted,spent,influenced\n");
        let mut spent = 0.0;
        let mut influenced = 0;
        for (i, p) in self.probes.iter().enumerate() {
            if p.accepted {
                spent += instance.rate(p.pair);
                influenced += 1 + p.revealed.iter().filter(|&&(_, live)| live).count();
            }
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                i + 1,
                instance.labels.name(p.pair.node),
                instance.rate(p.pair),
                p.accepted,
                spent,
                influenced.min(self.cascade_size)
            );
        }
        out
    }
}

pub(crate) fn adaptive_budget(spec: &BudgetSpec) -> Result<f64> {
    match spec.mode {
        BudgetMode::Hard => Ok(spec.budget),
        BudgetMode::Soft => Err(Error::InvalidParameter(
            "adaptive policies bound the delivered cost; use the hard budget mode".into(),
        )),
    }
}

/// Runs `policy` to completion against a fixed realization.
pub fn run_policy(
    policy: &dyn Policy,
    instance: &Instance,
    spec: &BudgetSpec,
    seeding: &SeedingRealization,
    diffusion: &DiffusionRealization,
) -> Result<TrajectoryRecord> {
    let budget = adaptive_budget(spec)?;
    if seeding.thresholds().len() != instance.node_count()
        || diffusion.states().len() != instance.graph.edge_count()
    {
        return Err(Error::Validation(
            "realization does not cover the instance".into(),
        ));
    }
    let mut session = Session::new(instance, budget, seeding, diffusion);
    policy.execute(&mut session)?;
    Ok(session.into_record())
}
