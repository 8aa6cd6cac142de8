//! Budgeted hill climbing over seed-discount pairs.
//!
//! Two candidates are built: the best affordable single pair, and a greedy
//! set grown by the pair with the highest marginal gain per unit of
//! incremental cost among those that still fit the budget. The better of the
//! two is returned.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{node_cost, BudgetSpec, Configuration};
use super::evaluator::Evaluator;
use crate::error::Result;
use crate::graph::{Instance, SeedDiscountPair};

/// Gains at or below this are treated as zero; the greedy loop never spends
/// budget on them.
pub const MIN_GAIN: f64 = 1e-12;

/// Relative gap below which two scores are tied. Equal true gains computed
/// from different enumeration orders differ in the last few bits, and the
/// tie rule (lowest node, then lowest level) must not depend on that.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Whether `a` beats `b` by more than rounding noise.
pub fn clearly_greater(a: f64, b: f64) -> bool {
    a > b + TIE_TOLERANCE * a.abs().max(b.abs())
}

/// Lowest score still tied with the maximum `best`.
fn tie_floor(best: f64) -> f64 {
    best - TIE_TOLERANCE * best.abs()
}

/// The smallest key among the items whose score ties the maximum.
pub fn argmax_lowest<K: Ord + Copy>(items: impl IntoIterator<Item = (f64, K)>) -> Option<(f64, K)> {
    let items: Vec<(f64, K)> = items.into_iter().collect();
    let max = items.iter().map(|&(s, _)| s).max_by(f64::total_cmp)?;
    let floor = tie_floor(max);
    items.into_iter().filter(|&(s, _)| s >= floor).min_by_key(|&(_, k)| k)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreedyRule {
    /// `(f(S + h) - f(S)) / incremental cost of h`
    #[default]
    Marginal,
    /// `f(S + h) / d(h)`, the ratio as printed in the original pseudocode.
    LiteralTotal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HillClimbOptions {
    pub rule: GreedyRule,
    /// Lazy re-evaluation through a priority queue. Only honored for the
    /// marginal rule, whose ratios can only shrink between evaluations.
    pub lazy: bool,
}

impl Default for HillClimbOptions {
    fn default() -> Self {
        HillClimbOptions {
            rule: GreedyRule::Marginal,
            lazy: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Candidate {
    SinglePair,
    GreedySet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HillClimbResult {
    pub config: Configuration,
    pub value: f64,
    pub cost: f64,
    pub chosen: Candidate,
    pub single_pair: Option<SeedDiscountPair>,
    pub single_value: f64,
    pub greedy_value: f64,
    /// Pairs in the order the greedy loop added them.
    pub greedy_order: Vec<SeedDiscountPair>,
    pub gain_evaluations: usize,
}

/// Candidate key ordered so that the maximum is the highest ratio, then the
/// lowest node, then the lowest level.
#[derive(Clone, Copy, Debug)]
struct Scored {
    ratio: f64,
    gain: f64,
    pair: SeedDiscountPair,
    round: usize,
}

impl PartialEq for Scored {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scored {}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ratio
            .total_cmp(&other.ratio)
            .then_with(|| other.pair.cmp(&self.pair))
    }
}

struct Greedy<'a, E: Evaluator> {
    instance: &'a Instance,
    spec: &'a BudgetSpec,
    evaluator: &'a E,
    rule: GreedyRule,
    levels: Vec<Option<usize>>,
    cost: f64,
    evaluations: usize,
}

impl<E: Evaluator> Greedy<'_, E> {
    /// Cost increase of adding `pair` now, or `None` if the pair is dominated
    /// or would not raise the cost at all.
    fn incremental_cost(&self, pair: SeedDiscountPair) -> Option<f64> {
        let current = self.levels[pair.node];
        if current >= Some(pair.level) {
            return None;
        }
        let inc = node_cost(self.instance, pair.node, Some(pair.level), self.spec.mode)
            - node_cost(self.instance, pair.node, current, self.spec.mode);
        (inc > 0.0).then_some(inc)
    }

    fn affordable(&self, inc: f64) -> bool {
        self.spec.admits(self.cost + inc)
    }

    fn ratio(&self, state: &E::State, pair: SeedDiscountPair, gain: f64, inc: f64) -> f64 {
        match self.rule {
            GreedyRule::Marginal => gain / inc,
            GreedyRule::LiteralTotal => {
                (self.evaluator.value(state) + gain) / self.instance.rate(pair)
            }
        }
    }

    fn score_all(
        &mut self,
        state: &E::State,
        pairs: &[SeedDiscountPair],
        round: usize,
    ) -> Result<Vec<Scored>> {
        let scored = pairs
            .par_iter()
            .filter_map(|&pair| {
                let inc = self.incremental_cost(pair)?;
                if !self.affordable(inc) {
                    return None;
                }
                Some(self.evaluator.gain(state, pair).map(|gain| Scored {
                    ratio: self.ratio(state, pair, gain, inc),
                    gain,
                    pair,
                    round,
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        self.evaluations += scored.len();
        Ok(scored)
    }

    /// Drops outdated or unaffordable entries and rescores stale ones.
    fn refresh(
        &mut self,
        state: &E::State,
        entry: Scored,
        ver: usize,
        version: &[usize],
        round: usize,
    ) -> Result<Option<Scored>> {
        let pair = entry.pair;
        if ver != version[pair.node] {
            return Ok(None);
        }
        let Some(inc) = self.incremental_cost(pair) else { return Ok(None) };
        if !self.affordable(inc) {
            return Ok(None);
        }
        if entry.round == round {
            return Ok(Some(entry));
        }
        let gain = self.evaluator.gain(state, pair)?;
        self.evaluations += 1;
        Ok(Some(Scored {
            ratio: self.ratio(state, pair, gain, inc),
            gain,
            pair,
            round,
        }))
    }

    fn commit(&mut self, state: &mut E::State, pair: SeedDiscountPair) -> Result<()> {
        let inc = self.incremental_cost(pair).expect("committed pair raises cost");
        self.cost += inc;
        self.levels[pair.node] = Some(pair.level);
        self.evaluator.insert(state, pair)
    }

    /// Re-evaluates every live candidate each round.
    fn run_plain(
        &mut self,
        state: &mut E::State,
        mut candidates: Vec<SeedDiscountPair>,
        first: Vec<Scored>,
    ) -> Result<Vec<SeedDiscountPair>> {
        let mut order = Vec::new();
        let mut scored = first;
        loop {
            scored.retain(|s| s.gain > MIN_GAIN);
            let Some((_, pair)) = argmax_lowest(scored.iter().map(|s| (s.ratio, s.pair))) else { break };
            self.commit(state, pair)?;
            order.push(pair);
            candidates.retain(|&p| self.incremental_cost(p).is_some_and(|inc| self.affordable(inc)));
            scored = self.score_all(state, &candidates, order.len())?;
        }
        Ok(order)
    }

    /// Lazy evaluation: stale ratios are upper bounds for nodes whose level has
    /// not changed, because gains shrink and their incremental cost is fixed.
    /// Candidates of a node whose level changed are rescored immediately.
    fn run_lazy(&mut self, state: &mut E::State, first: Vec<Scored>) -> Result<Vec<SeedDiscountPair>> {
        let n = self.instance.node_count();
        let m = self.instance.menu.len();
        let mut version = vec![0usize; n];
        let mut heap: BinaryHeap<(Scored, usize)> = first.into_iter().map(|s| (s, 0)).collect();
        let mut order = Vec::new();
        let mut round = 0usize;

        while let Some((entry, ver)) = heap.pop() {
            let stale = entry.round != round;
            let Some(top) = self.refresh(state, entry, ver, &version, round)? else { continue };
            if stale {
                heap.push((top, ver));
                continue;
            }
            if top.gain <= MIN_GAIN {
                continue;
            }
            // Gather every candidate tied with the fresh maximum; stale
            // entries are upper bounds, so only those above the floor matter.
            let floor = tie_floor(top.ratio);
            let mut tied = vec![top];
            let mut held = Vec::new();
            while heap.peek().is_some_and(|(s, _)| s.ratio >= floor) {
                let (s, v) = heap.pop().expect("peeked");
                let Some(s) = self.refresh(state, s, v, &version, round)? else { continue };
                if s.ratio >= floor && s.gain > MIN_GAIN {
                    tied.push(s);
                } else if s.gain > MIN_GAIN {
                    held.push(s);
                }
            }
            tied.sort_by_key(|s| s.pair);
            let pair = tied[0].pair;
            for s in tied.into_iter().skip(1).chain(held) {
                heap.push((s, version[s.pair.node]));
            }
            self.commit(state, pair)?;
            order.push(pair);
            round += 1;
            version[pair.node] += 1;
            let siblings: Vec<SeedDiscountPair> = (pair.level + 1..m)
                .map(|l| SeedDiscountPair::new(pair.node, l))
                .collect();
            for s in self.score_all(state, &siblings, round)? {
                heap.push((s, version[pair.node]));
            }
        }
        Ok(order)
    }
}

pub fn hill_climbing<E: Evaluator>(
    instance: &Instance,
    spec: &BudgetSpec,
    evaluator: &E,
    options: HillClimbOptions,
) -> Result<HillClimbResult> {
    let n = instance.node_count();
    let mut greedy = Greedy {
        instance,
        spec,
        evaluator,
        rule: options.rule,
        levels: vec![None; n],
        cost: 0.0,
        evaluations: 0,
    };
    let mut state = evaluator.empty();
    let all: Vec<SeedDiscountPair> = instance.all_pairs().collect();
    let first = greedy.score_all(&state, &all, 0)?;

    // Best affordable single pair; ties keep the lowest node, then level.
    let single = argmax_lowest(first.iter().map(|s| (s.gain, s.pair))).map(|(v, p)| (p, v));

    let order = if options.lazy && options.rule == GreedyRule::Marginal {
        greedy.run_lazy(&mut state, first)?
    } else {
        let candidates = first.iter().map(|s| s.pair).collect();
        greedy.run_plain(&mut state, candidates, first)?
    };
    let greedy_value = evaluator.value(&state);
    let single_value = single.map_or(0.0, |(_, v)| v);

    let (config, value, chosen) = match single {
        Some((pair, v)) if clearly_greater(v, greedy_value) => {
            let config: Configuration = [pair].into_iter().collect();
            (config, v, Candidate::SinglePair)
        }
        _ => (
            evaluator.config(&state).normalized(),
            greedy_value,
            Candidate::GreedySet,
        ),
    };
    let cost = super::config::config_cost(&config, instance, spec);
    Ok(HillClimbResult {
        config,
        value,
        cost,
        chosen,
        single_pair: single.map(|(p, _)| p),
        single_value,
        greedy_value,
        greedy_order: order,
        gain_evaluations: greedy.evaluations,
    })
}
