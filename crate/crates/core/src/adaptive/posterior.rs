//! Realizations consistent with an information state.

use super::session::PolicyState;
use crate::cascade::{DiffusionRealization, SeedingRealization};
use crate::error::{Error, Result};
use crate::graph::{AdoptionModel, Instance, NodeId};
use crate::rng::{tags, RngStream};

/// Default bound on the number of realizations enumerated exhaustively.
pub const DEFAULT_REALIZATION_CAP: u128 = 1 << 20;

/// Probability that `v` accepts `level` given that it rejected every level
/// below `floor`.
pub fn acceptance_probability(model: &AdoptionModel, v: NodeId, floor: usize, level: usize) -> f64 {
    let lo = if floor == 0 { 0.0 } else { model.prob(v, floor - 1) };
    if lo >= 1.0 {
        return 0.0;
    }
    ((model.prob(v, level) - lo) / (1.0 - lo)).clamp(0.0, 1.0)
}

/// Posterior distribution of `v`'s minimum accepted level given the floor.
fn level_outcomes(model: &AdoptionModel, v: NodeId, floor: usize) -> Vec<(Option<usize>, f64)> {
    let m = model.levels();
    let lo = if floor == 0 { 0.0 } else { model.prob(v, floor - 1) };
    if floor >= m || lo >= 1.0 {
        return vec![(None, 1.0)];
    }
    let mut out = Vec::with_capacity(m - floor + 1);
    let mut prev = lo;
    for l in floor..m {
        let p = model.prob(v, l);
        if p > prev {
            out.push((Some(l), (p - prev) / (1.0 - lo)));
        }
        prev = p;
    }
    if prev < 1.0 {
        out.push((None, (1.0 - prev) / (1.0 - lo)));
    }
    out
}

/// Calls `f` with every realization consistent with `state` that has nonzero
/// posterior probability, together with that probability. Thresholds are the
/// representatives of their level intervals; influenced nodes get threshold 1.
pub fn for_each_consistent_realization(
    instance: &Instance,
    state: &PolicyState,
    cap: u128,
    mut f: impl FnMut(&SeedingRealization, &DiffusionRealization, f64) -> Result<()>,
) -> Result<()> {
    let model = &instance.model;
    let graph = &instance.graph;
    let obs = state.observation();

    let node_choices: Vec<Vec<(Option<usize>, f64)>> = (0..instance.node_count())
        .map(|v| {
            if obs.is_influenced(v) {
                vec![(None, 1.0)]
            } else {
                level_outcomes(model, v, state.floor(v))
            }
        })
        .collect();
    let mut fixed = DiffusionRealization::all(graph, false);
    let mut free_edges = Vec::new();
    for (e, edge) in graph.edges().iter().enumerate() {
        match obs.edge_state(e) {
            Some(live) => fixed.set(e, live),
            None if edge.prob >= 1.0 => fixed.set(e, true),
            None if edge.prob > 0.0 => free_edges.push(e),
            None => {}
        }
    }

    let size = node_choices
        .iter()
        .try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128))
        .and_then(|s| s.checked_shl(free_edges.len() as u32).filter(|_| free_edges.len() < 100));
    match size {
        Some(s) if s <= cap => {}
        _ => {
            return Err(Error::TooLarge {
                what: "realization space",
                size: size.unwrap_or(u128::MAX),
                cap,
            })
        }
    }

    let mut idx = vec![0usize; node_choices.len()];
    loop {
        let levels: Vec<Option<usize>> =
            idx.iter().zip(&node_choices).map(|(&i, c)| c[i].0).collect();
        let p_nodes: f64 = idx.iter().zip(&node_choices).map(|(&i, c)| c[i].1).product();
        // Influenced nodes are never probed again; they carry `None`.
        let thresholds = levels
            .iter()
            .enumerate()
            .map(|(v, l)| l.map_or(1.0, |l| model.prob(v, l)))
            .collect();
        let seeding = SeedingRealization::from_thresholds(model, thresholds)?;
        let mut diffusion = fixed.clone();
        for mask in 0u64..(1u64 << free_edges.len()) {
            let mut p = p_nodes;
            for (i, &e) in free_edges.iter().enumerate() {
                let live = mask >> i & 1 == 1;
                diffusion.set(e, live);
                let q = graph.edge(e).prob;
                p *= if live { q } else { 1.0 - q };
            }
            f(&seeding, &diffusion, p)?;
        }

        // Advance the odometer over node outcomes.
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(());
            }
            idx[k] += 1;
            if idx[k] < node_choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Draws a realization from the posterior given `state`. Thresholds of nodes
/// that rejected up to level `l - 1` are uniform on `(p_v(l - 1), 1]`;
/// revealed edges keep their state and the rest are fresh coins.
pub fn sample_consistent_realization(
    instance: &Instance,
    state: &PolicyState,
    stream: &RngStream,
) -> (SeedingRealization, DiffusionRealization) {
    let model = &instance.model;
    let graph = &instance.graph;
    let obs = state.observation();
    let seeding_stream = stream.substream(tags::SEEDING);
    let thresholds = (0..instance.node_count())
        .map(|v| {
            let floor = state.floor(v);
            if obs.is_influenced(v) {
                return 1.0;
            }
            let lo = if floor == 0 { 0.0 } else { model.prob(v, floor - 1) };
            let u = seeding_stream.unit_open_closed(v as u64);
            (lo + (1.0 - lo) * u).min(1.0)
        })
        .collect();
    let seeding = SeedingRealization::from_thresholds(model, thresholds).expect("thresholds in (0, 1]");
    let diffusion_stream = stream.substream(tags::DIFFUSION);
    let live = (0..graph.edge_count())
        .map(|e| {
            obs.edge_state(e)
                .unwrap_or_else(|| diffusion_stream.unit(e as u64) < graph.edge(e).prob)
        })
        .collect();
    let diffusion = DiffusionRealization::new(graph, live).expect("one state per edge");
    (seeding, diffusion)
}
