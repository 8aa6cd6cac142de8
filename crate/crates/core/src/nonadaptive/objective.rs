//! The expected cascade `f(S)` of a configuration.

use rayon::prelude::*;

use super::config::Configuration;
use crate::cascade::{replicate_cascade, spread_exact, threshold_draw, DEFAULT_EDGE_CAP};
use crate::error::{Error, Result};
use crate::graph::{AdoptionModel, Instance};
use crate::rng::RngStream;

/// Limits for the double enumeration behind [`f_exact`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactCaps {
    /// Maximum number of nodes whose adoption is uncertain (`0 < p < 1`).
    pub node_cap: usize,
    /// Maximum number of uncertain edges per cascade enumeration.
    pub edge_cap: usize,
}

impl Default for ExactCaps {
    fn default() -> Self {
        ExactCaps {
            node_cap: 15,
            edge_cap: DEFAULT_EDGE_CAP,
        }
    }
}

/// `Pr(U; V; S) = prod_{u in U} p_u(d_S[u]) * prod_{v not in U} (1 - p_v(d_S[v]))`.
/// `in_seed_set[v]` marks membership in `U`.
pub fn seedset_probability(config: &Configuration, model: &AdoptionModel, in_seed_set: &[bool]) -> f64 {
    let levels = config.effective_levels(model.node_count());
    levels
        .iter()
        .enumerate()
        .map(|(v, &level)| {
            let p = model.prob_at(v, level);
            if in_seed_set[v] {
                p
            } else {
                1.0 - p
            }
        })
        .product()
}

/// Exact `f(S) = sum_U Pr(U; V; S) * I(U)`, summing over the seed sets with
/// nonzero probability.
pub fn f_exact(config: &Configuration, instance: &Instance, caps: ExactCaps) -> Result<f64> {
    let n = instance.node_count();
    let levels = config.effective_levels(n);
    let mut sure = Vec::new();
    let mut uncertain = Vec::new();
    for (v, &level) in levels.iter().enumerate() {
        let p = instance.model.prob_at(v, level);
        if p >= 1.0 {
            sure.push(v);
        } else if p > 0.0 {
            uncertain.push(v);
        }
    }
    if uncertain.len() > caps.node_cap {
        return Err(Error::TooLarge {
            what: "uncertain seed set",
            size: uncertain.len() as u128,
            cap: caps.node_cap as u128,
        });
    }

    let mut total = 0.0;
    let mut in_set = vec![false; n];
    let mut seeds = Vec::with_capacity(sure.len() + uncertain.len());
    for mask in 0u64..(1u64 << uncertain.len()) {
        in_set.iter_mut().for_each(|b| *b = false);
        seeds.clear();
        seeds.extend_from_slice(&sure);
        for (i, &v) in uncertain.iter().enumerate() {
            if mask >> i & 1 == 1 {
                seeds.push(v);
            }
        }
        for &v in &seeds {
            in_set[v] = true;
        }
        let pr = seedset_probability(config, &instance.model, &in_set);
        if pr == 0.0 {
            continue;
        }
        total += pr * spread_exact(&instance.graph, &seeds, caps.edge_cap)?;
    }
    Ok(total)
}

/// Cascade size of replicate `stream` under `levels`: each assigned node seeds
/// iff its threshold is at most `p_v(d_S[v])`.
pub(crate) fn replicate_value(
    instance: &Instance,
    levels: &[Option<usize>],
    excluded: &[bool],
    stream: &RngStream,
) -> usize {
    let seeds: Vec<usize> = levels
        .iter()
        .enumerate()
        .filter_map(|(v, &level)| {
            let l = level?;
            (instance.model.prob(v, l) >= threshold_draw(stream, v)).then_some(v)
        })
        .collect();
    replicate_cascade(&instance.graph, &seeds, excluded, stream)
}

/// Monte Carlo `f(S)`: mean cascade over `samples` replicates, each sampling
/// adoption decisions and then edge states.
pub fn f_mc(config: &Configuration, instance: &Instance, samples: usize, stream: &RngStream) -> f64 {
    assert!(samples >= 1, "f_mc needs at least one sample");
    let n = instance.node_count();
    let levels = config.effective_levels(n);
    let excluded = vec![false; n];
    let total: u64 = (0..samples as u64)
        .into_par_iter()
        .map(|i| replicate_value(instance, &levels, &excluded, &stream.substream(i)) as u64)
        .sum();
    total as f64 / samples as f64
}
