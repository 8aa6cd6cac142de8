use serde::{Deserialize, Serialize};

use super::realization::DiffusionRealization;
use super::spread::{spread_exact_excluding, spread_mc_excluding, DEFAULT_EDGE_CAP};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, NodeId, SeedDiscountPair, SocialGraph};
use crate::rng::{tags, RngStream};

/// How expected spreads are computed inside the algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpreadEstimator {
    Exact { edge_cap: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for SpreadEstimator {
    fn default() -> Self {
        SpreadEstimator::Exact {
            edge_cap: DEFAULT_EDGE_CAP,
        }
    }
}

impl SpreadEstimator {
    /// Expected cascade of `seeds` avoiding `excluded` nodes. Monte Carlo
    /// estimates made under the same `context` share their random numbers.
    pub fn estimate(
        &self,
        graph: &SocialGraph,
        seeds: &[NodeId],
        excluded: &[bool],
        context: u64,
    ) -> Result<f64> {
        match *self {
            SpreadEstimator::Exact { edge_cap } => {
                spread_exact_excluding(graph, seeds, excluded, edge_cap)
            }
            SpreadEstimator::MonteCarlo { samples, seed } => {
                let stream = RngStream::new(seed)
                    .substream(tags::ESTIMATOR)
                    .substream(context);
                Ok(spread_mc_excluding(graph, seeds, excluded, samples, &stream))
            }
        }
    }
}

/// Outcome of one probe, with the edges whose state it revealed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeOutcome {
    pub pair: SeedDiscountPair,
    pub accepted: bool,
    /// `(edge, live)` in reveal order; empty for rejections.
    pub revealed: Vec<(EdgeId, bool)>,
}

/// What a policy has seen so far: probe responses, revealed edges and the
/// influenced set `dom(psi_p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialObservation {
    revealed: Vec<Option<bool>>,
    influenced: Vec<bool>,
    influenced_count: usize,
    probes: Vec<ProbeOutcome>,
}

impl PartialObservation {
    pub fn new(graph: &SocialGraph) -> Self {
        PartialObservation {
            revealed: vec![None; graph.edge_count()],
            influenced: vec![false; graph.node_count()],
            influenced_count: 0,
            probes: Vec::new(),
        }
    }

    #[inline]
    pub fn is_influenced(&self, v: NodeId) -> bool {
        self.influenced[v]
    }

    /// Influence mask indexed by node.
    pub fn influenced(&self) -> &[bool] {
        &self.influenced
    }

    pub fn influenced_count(&self) -> usize {
        self.influenced_count
    }

    pub fn influenced_nodes(&self) -> Vec<NodeId> {
        (0..self.influenced.len()).filter(|&v| self.influenced[v]).collect()
    }

    pub fn edge_state(&self, e: EdgeId) -> Option<bool> {
        self.revealed[e]
    }

    pub fn probes(&self) -> &[ProbeOutcome] {
        &self.probes
    }

    /// Records a probe response. On acceptance the cascade from the seed is
    /// followed through `diffusion`, and every out-edge of each newly
    /// influenced node is revealed.
    pub fn record_probe(
        &mut self,
        graph: &SocialGraph,
        diffusion: &DiffusionRealization,
        pair: SeedDiscountPair,
        accepted: bool,
    ) -> Result<&ProbeOutcome> {
        let mut revealed = Vec::new();
        if accepted {
            if self.influenced[pair.node] {
                return Err(Error::AlreadyInfluenced(pair.node));
            }
            self.influenced[pair.node] = true;
            self.influenced_count += 1;
            let mut queue = vec![pair.node];
            let mut head = 0;
            while head < queue.len() {
                let u = queue[head];
                head += 1;
                for &e in graph.out_edges(u) {
                    let live = diffusion.is_live(e);
                    self.revealed[e] = Some(live);
                    revealed.push((e, live));
                    let t = graph.edge(e).target;
                    if live && !self.influenced[t] {
                        self.influenced[t] = true;
                        self.influenced_count += 1;
                        queue.push(t);
                    }
                }
            }
        }
        self.probes.push(ProbeOutcome {
            pair,
            accepted,
            revealed,
        });
        Ok(self.probes.last().expect("just pushed"))
    }
}

/// `Delta(h | psi_p)`: expected spread of `v` in the subgraph induced by the
/// nodes not yet influenced, given that `v` has become a seed.
pub fn conditional_spread(
    graph: &SocialGraph,
    obs: &PartialObservation,
    v: NodeId,
    estimator: &SpreadEstimator,
) -> Result<f64> {
    if obs.is_influenced(v) {
        return Err(Error::AlreadyInfluenced(v));
    }
    estimator.estimate(graph, &[v], obs.influenced(), obs.influenced_count() as u64)
}
