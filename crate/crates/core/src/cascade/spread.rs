//! Cascade reachability and expected spread `I(U)`.

use rayon::prelude::*;

use super::realization::{edge_coin, DiffusionRealization};
use super::scratch::with_scratch;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, NodeId, SocialGraph};
use crate::rng::{tags, RngStream};

/// Default limit on the number of uncertain edges (`0 < p < 1`) an exact
/// enumeration may branch on.
pub const DEFAULT_EDGE_CAP: usize = 25;

/// Confidence level used for reported Hoeffding radii.
pub const DEFAULT_DELTA: f64 = 0.05;

/// Half-width `range * sqrt(ln(2/delta) / (2 * samples))` of the Hoeffding
/// interval for the mean of `samples` draws bounded in `[0, range]`.
pub fn hoeffding_radius(range: f64, samples: usize, delta: f64) -> f64 {
    if samples == 0 {
        return f64::INFINITY;
    }
    range * ((2.0 / delta).ln() / (2.0 * samples as f64)).sqrt()
}

/// Seeds plus every node reachable from them through live edges, sorted.
pub fn reachable(graph: &SocialGraph, psi: &DiffusionRealization, seeds: &[NodeId]) -> Vec<NodeId> {
    with_scratch(|s| {
        s.cascade_size(graph, seeds.iter().copied(), |_| false, |e| psi.is_live(e));
        let mut out = s.reached().to_vec();
        out.sort_unstable();
        out
    })
}

/// Count of uncertain edges an exact enumeration from `seeds` could branch on:
/// edges with `0 < p < 1` leaving a node reachable through possible (`p > 0`)
/// edges and entering a non-excluded node.
pub fn uncertain_edge_count(graph: &SocialGraph, seeds: &[NodeId], excluded: &[bool]) -> usize {
    with_scratch(|s| {
        s.cascade_size(
            graph,
            seeds.iter().copied(),
            |v| excluded[v],
            |e| graph.edge(e).prob > 0.0,
        );
        s.reached()
            .iter()
            .flat_map(|&u| graph.out_edges(u))
            .filter(|&&e| {
                let edge = graph.edge(e);
                edge.prob > 0.0 && edge.prob < 1.0 && !excluded[edge.target]
            })
            .count()
    })
}

/// Exact `I(seeds)` by enumerating edge outcomes.
pub fn spread_exact(graph: &SocialGraph, seeds: &[NodeId], edge_cap: usize) -> Result<f64> {
    spread_exact_excluding(graph, seeds, &vec![false; graph.node_count()], edge_cap)
}

/// Exact expected cascade of `seeds` in the subgraph induced by the nodes not
/// marked in `excluded`.
///
/// The enumeration follows the cascade outward and only branches on an edge
/// when its source has been reached and its target has not, which yields the
/// same value as summing over all `2^|E|` live-edge assignments while
/// visiting far fewer outcomes. Edges with `p = 0` or `p = 1` never branch.
pub fn spread_exact_excluding(
    graph: &SocialGraph,
    seeds: &[NodeId],
    excluded: &[bool],
    edge_cap: usize,
) -> Result<f64> {
    let uncertain = uncertain_edge_count(graph, seeds, excluded);
    if uncertain > edge_cap {
        return Err(Error::TooLarge {
            what: "uncertain edge set",
            size: uncertain as u128,
            cap: edge_cap as u128,
        });
    }

    let mut reached = vec![false; graph.node_count()];
    let mut pending: Vec<EdgeId> = Vec::new();
    let mut count = 0usize;
    for &s in seeds {
        if !excluded[s] && !reached[s] {
            reached[s] = true;
            count += 1;
            pending.extend_from_slice(graph.out_edges(s));
        }
    }
    let mut total = 0.0;
    explore(graph, excluded, reached, count, pending, 1.0, &mut total);
    Ok(total)
}

fn explore(
    graph: &SocialGraph,
    excluded: &[bool],
    mut reached: Vec<bool>,
    mut count: usize,
    mut pending: Vec<EdgeId>,
    mut prob: f64,
    total: &mut f64,
) {
    while let Some(e) = pending.pop() {
        let edge = graph.edge(e);
        let t = edge.target;
        if reached[t] || excluded[t] || edge.prob == 0.0 {
            continue;
        }
        if edge.prob == 1.0 {
            reached[t] = true;
            count += 1;
            pending.extend_from_slice(graph.out_edges(t));
            continue;
        }
        let mut live_reached = reached.clone();
        live_reached[t] = true;
        let mut live_pending = pending.clone();
        live_pending.extend_from_slice(graph.out_edges(t));
        explore(
            graph,
            excluded,
            live_reached,
            count + 1,
            live_pending,
            prob * edge.prob,
            total,
        );
        prob *= 1.0 - edge.prob;
    }
    *total += prob * count as f64;
}

/// Size of the cascade from `seeds` in replicate `stream`, with edge coins
/// drawn lazily from the replicate's diffusion substream.
pub(crate) fn replicate_cascade(
    graph: &SocialGraph,
    seeds: &[NodeId],
    excluded: &[bool],
    stream: &RngStream,
) -> usize {
    let diffusion = stream.substream(tags::DIFFUSION);
    with_scratch(|s| {
        s.cascade_size(
            graph,
            seeds.iter().copied(),
            |v| excluded[v],
            |e| edge_coin(&diffusion, e, graph.edge(e).prob),
        )
    })
}

/// Monte Carlo estimate of `I(seeds)`: the mean cascade size over `samples`
/// replicates, replicate `i` drawing from `stream.substream(i)`.
pub fn spread_mc(graph: &SocialGraph, seeds: &[NodeId], samples: usize, stream: &RngStream) -> f64 {
    spread_mc_excluding(graph, seeds, &vec![false; graph.node_count()], samples, stream)
}

pub fn spread_mc_excluding(
    graph: &SocialGraph,
    seeds: &[NodeId],
    excluded: &[bool],
    samples: usize,
    stream: &RngStream,
) -> f64 {
    assert!(samples >= 1, "spread_mc needs at least one sample");
    let total: u64 = (0..samples as u64)
        .into_par_iter()
        .map(|i| replicate_cascade(graph, seeds, excluded, &stream.substream(i)) as u64)
        .sum();
    total as f64 / samples as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::realization::sample_diffusion;
    use crate::graph::Edge;
    use crate::instances;

    #[test]
    fn empty_seed_set_spreads_nowhere() {
        let inst = instances::fig1();
        assert_eq!(spread_exact(&inst.graph, &[], DEFAULT_EDGE_CAP).unwrap(), 0.0);
        assert_eq!(spread_mc(&inst.graph, &[], 100, &RngStream::new(1)), 0.0);
        let psi = DiffusionRealization::all(&inst.graph, true);
        assert!(reachable(&inst.graph, &psi, &[]).is_empty());
    }

    #[test]
    fn full_reachability_with_all_edges_live() {
        let inst = instances::fig1();
        let psi = DiffusionRealization::all(&inst.graph, true);
        assert_eq!(reachable(&inst.graph, &psi, &[0]), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn exact_spread_on_fig1() {
        let g = instances::fig1().graph;
        assert!((spread_exact(&g, &[0], 25).unwrap() - 1.609).abs() < 1e-12);
        assert!((spread_exact(&g, &[3], 25).unwrap() - 1.1).abs() < 1e-12);
        assert!((spread_exact(&g, &[4], 25).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seeds_equal_to_all_nodes_give_n() {
        let g = instances::fig1().graph;
        let all: Vec<usize> = (0..5).collect();
        assert_eq!(spread_mc(&g, &all, 17, &RngStream::new(3)), 5.0);
        assert_eq!(spread_exact(&g, &all, 25).unwrap(), 5.0);
    }

    #[test]
    fn cap_is_enforced_on_uncertain_edges_only() {
        // A path of 30 certain edges enumerates fine; 30 uncertain edges do not.
        let certain: Vec<Edge> = (0..30)
            .map(|i| Edge { source: i, target: i + 1, prob: 1.0 })
            .collect();
        let g = SocialGraph::new(31, certain).unwrap();
        assert_eq!(spread_exact(&g, &[0], 25).unwrap(), 31.0);
        let uncertain: Vec<Edge> = (0..30)
            .map(|i| Edge { source: i, target: i + 1, prob: 0.5 })
            .collect();
        let g = SocialGraph::new(31, uncertain).unwrap();
        assert!(matches!(spread_exact(&g, &[0], 25), Err(Error::TooLarge { .. })));
        // Only the part reachable from the seeds counts.
        assert!(spread_exact(&g, &[10], 25).is_ok());
    }

    #[test]
    fn excluded_nodes_are_cut_out() {
        let g = instances::fig1().graph;
        let mut excluded = vec![false; 5];
        excluded[0] = true;
        excluded[1] = true;
        let v = spread_exact_excluding(&g, &[2], &excluded, 25).unwrap();
        assert!((v - 1.55).abs() < 1e-12);
    }

    #[test]
    fn live_edge_sampling_matches_probabilities() {
        let g = instances::fig1().graph;
        let all_live = SocialGraph::new(
            2,
            vec![Edge { source: 0, target: 1, prob: 1.0 }],
        )
        .unwrap();
        let all_blocked = SocialGraph::new(
            2,
            vec![Edge { source: 0, target: 1, prob: 0.0 }],
        )
        .unwrap();
        let s = RngStream::new(5);
        assert!(sample_diffusion(&all_live, &s).is_live(0));
        assert!(!sample_diffusion(&all_blocked, &s).is_live(0));

        let de = g.find_edge(3, 4).unwrap();
        let n = 1_000_000u64;
        let live = (0..n)
            .into_par_iter()
            .filter(|&i| sample_diffusion(&g, &s.substream(i)).is_live(de))
            .count();
        let freq = live as f64 / n as f64;
        assert!((freq - 0.1).abs() <= 0.002, "freq {freq}");
    }

    #[test]
    fn lazy_replicates_agree_with_presampled_realizations() {
        let g = instances::fig1().graph;
        let s = RngStream::new(11);
        for i in 0..500 {
            let rep = s.substream(i);
            let psi = sample_diffusion(&g, &rep);
            let eager = reachable(&g, &psi, &[0]).len();
            let lazy = replicate_cascade(&g, &[0], &[false; 5], &rep);
            assert_eq!(eager, lazy);
        }
    }

    #[test]
    fn hoeffding_radius_shrinks_with_samples() {
        let r1 = hoeffding_radius(5.0, 100, 0.05);
        let r2 = hoeffding_radius(5.0, 10_000, 0.05);
        assert!((r1 / r2 - 10.0).abs() < 1e-9);
        assert!((hoeffding_radius(1.0, 1, 0.05) - (2.0f64 / 0.05).ln().sqrt() / 2f64.sqrt()).abs() < 1e-12);
    }
}
