//! Incremental evaluators of `f` used by the hill-climbing allocator.

use rayon::prelude::*;

use super::config::Configuration;
use super::objective::{f_exact, replicate_value, ExactCaps};
use crate::cascade::scratch::with_scratch;
use crate::cascade::{edge_coin, threshold_draw};
use crate::error::Result;
use crate::graph::{Instance, SeedDiscountPair};
use crate::rng::{tags, RngStream};

/// An estimator of `f` that can be grown one pair at a time.
pub trait Evaluator: Sync {
    type State: Send + Sync;

    fn empty(&self) -> Self::State;
    fn config<'s>(&self, state: &'s Self::State) -> &'s Configuration;
    fn value(&self, state: &Self::State) -> f64;
    /// `f(S + pair) - f(S)`.
    fn gain(&self, state: &Self::State, pair: SeedDiscountPair) -> Result<f64>;
    fn insert(&self, state: &mut Self::State, pair: SeedDiscountPair) -> Result<()>;
    /// Half-width of the confidence interval on [`Evaluator::value`]; zero
    /// for exact evaluation.
    fn radius(&self) -> f64;
    /// Number of Monte Carlo samples per estimate, if any.
    fn samples(&self) -> Option<usize>;
}

/// Evaluates `f` with the exact double enumeration.
pub struct ExactEvaluator<'a> {
    instance: &'a Instance,
    caps: ExactCaps,
}

pub struct ExactState {
    config: Configuration,
    value: f64,
}

impl<'a> ExactEvaluator<'a> {
    pub fn new(instance: &'a Instance, caps: ExactCaps) -> Self {
        ExactEvaluator { instance, caps }
    }
}

impl Evaluator for ExactEvaluator<'_> {
    type State = ExactState;

    fn empty(&self) -> ExactState {
        ExactState {
            config: Configuration::new(),
            value: 0.0,
        }
    }

    fn config<'s>(&self, state: &'s ExactState) -> &'s Configuration {
        &state.config
    }

    fn value(&self, state: &ExactState) -> f64 {
        state.value
    }

    fn gain(&self, state: &ExactState, pair: SeedDiscountPair) -> Result<f64> {
        if state.config.effective_level(pair.node) >= Some(pair.level) {
            return Ok(0.0);
        }
        Ok(f_exact(&state.config.with(pair), self.instance, self.caps)? - state.value)
    }

    fn insert(&self, state: &mut ExactState, pair: SeedDiscountPair) -> Result<()> {
        state.config.insert(pair);
        state.value = f_exact(&state.config, self.instance, self.caps)?;
        Ok(())
    }

    fn radius(&self) -> f64 {
        0.0
    }

    fn samples(&self) -> Option<usize> {
        None
    }
}

/// Monte Carlo evaluator over a fixed set of replicates.
///
/// Replicate `r` uses the same thresholds and edge coins as replicate `r` of
/// [`super::f_mc`] with the same stream, so `value` equals `f_mc` of the
/// current configuration exactly. The evaluator keeps each replicate's
/// influenced set, which turns a marginal gain into a cascade restricted to
/// nodes not yet reached.
pub struct McEvaluator<'a> {
    instance: &'a Instance,
    samples: usize,
    stream: RngStream,
    delta: f64,
}

pub struct McState {
    config: Configuration,
    levels: Vec<Option<usize>>,
    /// Row-major `samples x n` influence marks.
    reached: Vec<bool>,
    total: u64,
}

impl<'a> McEvaluator<'a> {
    pub fn new(instance: &'a Instance, samples: usize, stream: RngStream) -> Self {
        assert!(samples >= 1, "Monte Carlo evaluator needs at least one sample");
        McEvaluator {
            instance,
            samples,
            stream,
            delta: crate::cascade::DEFAULT_DELTA,
        }
    }

    /// Whether `pair` turns `v` from inactive to a seed in replicate `rep`.
    #[inline]
    fn newly_live(&self, levels: &[Option<usize>], pair: SeedDiscountPair, rep: &RngStream) -> bool {
        let model = &self.instance.model;
        let g = threshold_draw(rep, pair.node);
        model.prob(pair.node, pair.level) >= g && model.prob_at(pair.node, levels[pair.node]) < g
    }
}

impl Evaluator for McEvaluator<'_> {
    type State = McState;

    fn empty(&self) -> McState {
        let n = self.instance.node_count();
        McState {
            config: Configuration::new(),
            levels: vec![None; n],
            reached: vec![false; n * self.samples],
            total: 0,
        }
    }

    fn config<'s>(&self, state: &'s McState) -> &'s Configuration {
        &state.config
    }

    fn value(&self, state: &McState) -> f64 {
        state.total as f64 / self.samples as f64
    }

    fn gain(&self, state: &McState, pair: SeedDiscountPair) -> Result<f64> {
        if state.levels[pair.node] >= Some(pair.level) {
            return Ok(0.0);
        }
        let n = self.instance.node_count();
        let graph = &self.instance.graph;
        let extra: u64 = (0..self.samples)
            .into_par_iter()
            .map(|r| {
                let row = &state.reached[r * n..(r + 1) * n];
                if row[pair.node] {
                    return 0;
                }
                let rep = self.stream.substream(r as u64);
                if !self.newly_live(&state.levels, pair, &rep) {
                    return 0;
                }
                let diffusion = rep.substream(tags::DIFFUSION);
                with_scratch(|s| {
                    s.cascade_size(
                        graph,
                        [pair.node],
                        |v| row[v],
                        |e| edge_coin(&diffusion, e, graph.edge(e).prob),
                    )
                }) as u64
            })
            .sum();
        Ok(extra as f64 / self.samples as f64)
    }

    fn insert(&self, state: &mut McState, pair: SeedDiscountPair) -> Result<()> {
        if state.levels[pair.node] >= Some(pair.level) {
            state.config.insert(pair);
            return Ok(());
        }
        let n = self.instance.node_count();
        let graph = &self.instance.graph;
        let levels = &state.levels;
        let added: u64 = state
            .reached
            .par_chunks_mut(n.max(1))
            .enumerate()
            .map(|(r, row)| {
                if row[pair.node] {
                    return 0;
                }
                let rep = self.stream.substream(r as u64);
                if !self.newly_live(levels, pair, &rep) {
                    return 0;
                }
                let diffusion = rep.substream(tags::DIFFUSION);
                with_scratch(|s| {
                    let size = s.cascade_size(
                        graph,
                        [pair.node],
                        |v| row[v],
                        |e| edge_coin(&diffusion, e, graph.edge(e).prob),
                    );
                    for &v in s.reached() {
                        row[v] = true;
                    }
                    size as u64
                })
            })
            .sum();
        state.total += added;
        state.levels[pair.node] = Some(pair.level);
        state.config.insert(pair);
        Ok(())
    }

    fn radius(&self) -> f64 {
        crate::cascade::hoeffding_radius(self.instance.node_count() as f64, self.samples, self.delta)
    }

    fn samples(&self) -> Option<usize> {
        Some(self.samples)
    }
}

/// Recomputes the value of a state from scratch; used to cross-check the
/// incremental bookkeeping.
pub fn mc_value_from_scratch(
    instance: &Instance,
    config: &Configuration,
    samples: usize,
    stream: &RngStream,
) -> f64 {
    let n = instance.node_count();
    let levels = config.effective_levels(n);
    let excluded = vec![false; n];
    let total: u64 = (0..samples as u64)
        .map(|r| replicate_value(instance, &levels, &excluded, &stream.substream(r)) as u64)
        .sum();
    total as f64 / samples as f64
}
