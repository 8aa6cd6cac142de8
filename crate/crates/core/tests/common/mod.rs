//! Tiny random instances and brute-force reference computations written
//! independently of the library's enumeration code.

#![allow(dead_code)]

use rand::Rng;
use viral_discount::graph::{AdoptionModel, DiscountMenu, Edge, Instance, NodeLabels, SocialGraph};
use viral_discount::nonadaptive::Configuration;
use viral_discount::rng::RngStream;

/// Random instance with at most `max_nodes` nodes, `max_edges` edges and
/// `levels` rates. Probabilities snap to 0 or 1 now and then.
pub fn tiny_instance(seed: u64, max_nodes: usize, max_edges: usize, levels: usize) -> Instance {
    let mut rng = RngStream::new(seed).rng();
    let n = rng.random_range(1..=max_nodes);
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    let mut edges = Vec::new();
    let want = rng.random_range(0..=max_edges.min(pairs.len()));
    while edges.len() < want {
        let (u, v) = pairs.swap_remove(rng.random_range(0..pairs.len()));
        let prob = match rng.random_range(0..10) {
            0 => 1.0,
            1 => 0.0,
            _ => rng.random::<f64>(),
        };
        edges.push(Edge { source: u, target: v, prob });
    }
    let mut rates: Vec<f64> = Vec::with_capacity(levels);
    let mut d = 0.2 + rng.random::<f64>();
    for _ in 0..levels {
        rates.push(d);
        d += 0.1 + rng.random::<f64>();
    }
    let mut table = Vec::with_capacity(n * levels);
    for _ in 0..n {
        let mut p: f64 = 0.0;
        for _ in 0..levels {
            p = match rng.random_range(0..8) {
                0 => p,
                1 => 1.0,
                _ => p + (1.0 - p) * rng.random::<f64>(),
            };
            table.push(p);
        }
    }
    Instance::new(
        SocialGraph::new(n, edges).unwrap(),
        DiscountMenu::new(rates).unwrap(),
        AdoptionModel::new(n, levels, table).unwrap(),
        NodeLabels::numeric(n),
    )
    .unwrap()
}

/// Nodes reachable from `seeds` over the edges marked live.
pub fn reach(graph: &SocialGraph, seeds: &[usize], live: &[bool]) -> usize {
    let n = graph.node_count();
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    for &s in seeds {
        if !seen[s] {
            seen[s] = true;
            stack.push(s);
        }
    }
    while let Some(u) = stack.pop() {
        for (e, edge) in graph.edges().iter().enumerate() {
            if edge.source == u && live[e] && !seen[edge.target] {
                seen[edge.target] = true;
                stack.push(edge.target);
            }
        }
    }
    seen.iter().filter(|&&b| b).count()
}

/// `I(seeds)` by summing over all `2^|E|` live-edge graphs.
pub fn brute_spread(graph: &SocialGraph, seeds: &[usize]) -> f64 {
    let m = graph.edge_count();
    assert!(m <= 20);
    let mut total = 0.0;
    for mask in 0u32..(1 << m) {
        let live: Vec<bool> = (0..m).map(|e| mask >> e & 1 == 1).collect();
        let pr: f64 = graph
            .edges()
            .iter()
            .zip(&live)
            .map(|(e, &l)| if l { e.prob } else { 1.0 - e.prob })
            .product();
        if pr > 0.0 {
            total += pr * reach(graph, seeds, &live) as f64;
        }
    }
    total
}

/// Highest rate level assigned to each node.
pub fn levels_of(config: &Configuration, n: usize) -> Vec<Option<usize>> {
    let mut out = vec![None; n];
    for p in config.pairs() {
        out[p.node] = out[p.node].max(Some(p.level));
    }
    out
}

/// `f(S)` summing over all `2^n` seed sets, every one weighted by its
/// probability under the effective discounts.
pub fn brute_f(config: &Configuration, instance: &Instance) -> f64 {
    let n = instance.node_count();
    let levels = levels_of(config, n);
    let p: Vec<f64> = (0..n)
        .map(|v| levels[v].map_or(0.0, |l| instance.model.prob(v, l)))
        .collect();
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        let seeds: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
        let pr: f64 = (0..n)
            .map(|v| if mask >> v & 1 == 1 { p[v] } else { 1.0 - p[v] })
            .product();
        if pr > 0.0 {
            total += pr * brute_spread(&instance.graph, &seeds);
        }
    }
    total
}

/// Hard-mode cost: the sum of effective discounts.
pub fn hard_cost(config: &Configuration, instance: &Instance) -> f64 {
    levels_of(config, instance.node_count())
        .iter()
        .flatten()
        .map(|&l| instance.menu.rate(l))
        .sum()
}
