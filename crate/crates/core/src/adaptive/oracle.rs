//! Optimal adaptive policy value by backward induction over information
//! states, for tiny instances.

use std::collections::HashMap;

use super::posterior::acceptance_probability;
use super::session::adaptive_budget;
use crate::error::{Error, Result};
use crate::graph::Instance;
use crate::nonadaptive::{BudgetSpec, BUDGET_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCaps {
    pub max_nodes: usize,
    pub max_edges: usize,
    pub max_levels: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            max_nodes: 5,
            max_edges: 6,
            max_levels: 2,
        }
    }
}

/// Hard limits of the state packing: 4 bits per node floor and per level count.
const PACK_LIMIT: usize = 15;

/// Influenced set, per-node rejection floors, accepted offers per level.
/// Spending is a function of the counts, and revealed edges only touch
/// influenced nodes, so this is a sufficient statistic for the future.
type State = (u32, u64, u64);

struct Oracle<'a> {
    instance: &'a Instance,
    budget: f64,
    memo: HashMap<State, f64>,
    cascades: HashMap<(u32, usize), Vec<(u32, f64)>>,
}

/// `max_pi f(pi)` over adaptive policies under a hard budget.
pub fn optimal_policy_oracle(instance: &Instance, spec: &BudgetSpec, caps: OracleCaps) -> Result<f64> {
    let budget = adaptive_budget(spec)?;
    let n = instance.node_count();
    let edges = instance.graph.edge_count();
    let m = instance.menu.len();
    for (what, size, cap) in [
        ("oracle node count", n, caps.max_nodes.min(PACK_LIMIT)),
        ("oracle edge count", edges, caps.max_edges.min(20)),
        ("oracle discount levels", m, caps.max_levels.min(PACK_LIMIT)),
    ] {
        if size > cap {
            return Err(Error::TooLarge {
                what,
                size: size as u128,
                cap: cap as u128,
            });
        }
    }
    let mut oracle = Oracle {
        instance,
        budget,
        memo: HashMap::new(),
        cascades: HashMap::new(),
    };
    Ok(oracle.value((0, 0, 0)))
}

fn nibble(word: u64, i: usize) -> usize {
    (word >> (4 * i) & 0xF) as usize
}

fn with_nibble(word: u64, i: usize, value: usize) -> u64 {
    word & !(0xF << (4 * i)) | (value as u64) << (4 * i)
}

impl Oracle<'_> {
    fn spent(&self, counts: u64) -> f64 {
        (0..self.instance.menu.len())
            .map(|l| nibble(counts, l) as f64 * self.instance.menu.rate(l))
            .sum()
    }

    fn value(&mut self, state: State) -> f64 {
        if let Some(&v) = self.memo.get(&state) {
            return v;
        }
        let (dom, floors, counts) = state;
        let n = self.instance.node_count();
        let m = self.instance.menu.len();
        let spent = self.spent(counts);
        let mut best = dom.count_ones() as f64;
        for v in (0..n).filter(|&v| dom >> v & 1 == 0) {
            let floor = nibble(floors, v);
            for l in floor..m {
                if spent + self.instance.menu.rate(l) > self.budget + BUDGET_TOLERANCE {
                    break;
                }
                let q = acceptance_probability(&self.instance.model, v, floor, l);
                let mut expected = 0.0;
                if q < 1.0 {
                    expected += (1.0 - q) * self.value((dom, with_nibble(floors, v, l + 1), counts));
                }
                if q > 0.0 {
                    let next_counts = with_nibble(counts, l, nibble(counts, l) + 1);
                    for (reached, p) in self.cascade(dom, v) {
                        let next_dom = dom | reached;
                        // Floors of influenced nodes no longer matter.
                        let next_floors = (0..n)
                            .filter(|&u| next_dom >> u & 1 == 0)
                            .fold(0, |acc, u| with_nibble(acc, u, nibble(floors, u)));
                        expected += q * p * self.value((next_dom, next_floors, next_counts));
                    }
                }
                best = best.max(expected);
            }
        }
        self.memo.insert(state, best);
        best
    }

    /// Distribution of the set newly influenced by seeding `v`, over the
    /// unrevealed edges among nodes outside `dom`.
    fn cascade(&mut self, dom: u32, v: usize) -> Vec<(u32, f64)> {
        if let Some(c) = self.cascades.get(&(dom, v)) {
            return c.clone();
        }
        let graph = &self.instance.graph;
        let inner: Vec<usize> = (0..graph.edge_count())
            .filter(|&e| {
                let edge = graph.edge(e);
                dom >> edge.source & 1 == 0 && dom >> edge.target & 1 == 0
            })
            .collect();
        let mut dist: HashMap<u32, f64> = HashMap::new();
        for mask in 0u32..(1 << inner.len()) {
            let mut p = 1.0;
            let mut live = vec![false; graph.edge_count()];
            for (i, &e) in inner.iter().enumerate() {
                let q = graph.edge(e).prob;
                if mask >> i & 1 == 1 {
                    live[e] = true;
                    p *= q;
                } else {
                    p *= 1.0 - q;
                }
            }
            if p == 0.0 {
                continue;
            }
            let mut reached = 1u32 << v;
            let mut stack = vec![v];
            while let Some(u) = stack.pop() {
                for &e in graph.out_edges(u) {
                    let t = graph.edge(e).target;
                    if live[e] && reached >> t & 1 == 0 {
                        reached |= 1 << t;
                        stack.push(t);
                    }
                }
            }
            *dist.entry(reached).or_insert(0.0) += p;
        }
        let mut out: Vec<(u32, f64)> = dist.into_iter().collect();
        out.sort_unstable_by_key(|&(r, _)| r);
        self.cascades.insert((dom, v), out.clone());
        out
    }
}
