//! Social network, discount menu and adoption model.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    /// Propagation probability `p_uv`.
    pub prob: f64,
}

/// Directed graph with per-edge propagation probabilities, stored as a
/// compressed out-adjacency over edge ids.
#[derive(Clone, Debug, PartialEq)]
pub struct SocialGraph {
    node_count: usize,
    edges: Vec<Edge>,
    out_offsets: Vec<usize>,
    out_edges: Vec<EdgeId>,
}

impl SocialGraph {
    /// Builds a graph, rejecting self-loops, parallel edges, dangling
    /// endpoints and probabilities outside `[0, 1]`.
    ///
    /// A graph with zero nodes is accepted here for degenerate in-process
    /// use; the file loader requires at least one node.
    pub fn new(node_count: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for (id, e) in edges.iter().enumerate() {
            if e.source >= node_count || e.target >= node_count {
                return Err(Error::Validation(format!(
                    "edge {id} ({} -> {}) references a node outside 0..{node_count}",
                    e.source, e.target
                )));
            }
            if e.source == e.target {
                return Err(Error::Validation(format!("self-loop on node {}", e.source)));
            }
            if !(0.0..=1.0).contains(&e.prob) {
                return Err(Error::Validation(format!(
                    "edge {} -> {} has probability {} outside [0, 1]",
                    e.source, e.target, e.prob
                )));
            }
            if !seen.insert((e.source, e.target)) {
                return Err(Error::Validation(format!(
                    "duplicate edge {} -> {}",
                    e.source, e.target
                )));
            }
        }

        let mut out_offsets = vec![0usize; node_count + 1];
        for e in &edges {
            out_offsets[e.source + 1] += 1;
        }
        for v in 0..node_count {
            out_offsets[v + 1] += out_offsets[v];
        }
        let mut fill = out_offsets.clone();
        let mut out_edges = vec![0; edges.len()];
        for (id, e) in edges.iter().enumerate() {
            out_edges[fill[e.source]] = id;
            fill[e.source] += 1;
        }

        Ok(SocialGraph {
            node_count,
            edges,
            out_offsets,
            out_edges,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// Ids of the edges leaving `v`, in input order.
    #[inline]
    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.out_edges[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    pub fn find_edge(&self, source: NodeId, target: NodeId) -> Option<EdgeId> {
        self.out_edges(source)
            .iter()
            .copied()
            .find(|&id| self.edges[id].target == target)
    }
}

/// Strictly increasing list of positive discount rates `d_1 < ... < d_m`.
///
/// Rates are addressed by their index ("level") everywhere else in the crate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DiscountMenu {
    rates: Vec<f64>,
}

impl DiscountMenu {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::Validation("discount menu is empty".into()));
        }
        for &r in &rates {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Validation(format!(
                    "discount rate {r} is not a positive finite number"
                )));
            }
        }
        if rates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(format!(
                "discount rates {rates:?} are not strictly increasing"
            )));
        }
        Ok(DiscountMenu { rates })
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    #[inline]
    pub fn rate(&self, level: usize) -> f64 {
        self.rates[level]
    }

    pub fn max_level(&self) -> usize {
        self.rates.len() - 1
    }

    pub fn d_max(&self) -> f64 {
        self.rates[self.rates.len() - 1]
    }

    pub fn d_min(&self) -> f64 {
        self.rates[0]
    }

    /// Level whose rate equals `rate` exactly.
    pub fn level_of(&self, rate: f64) -> Option<usize> {
        self.rates.iter().position(|&r| r == rate)
    }
}

impl TryFrom<Vec<f64>> for DiscountMenu {
    type Error = Error;

    fn try_from(rates: Vec<f64>) -> Result<Self> {
        DiscountMenu::new(rates)
    }
}

impl From<DiscountMenu> for Vec<f64> {
    fn from(menu: DiscountMenu) -> Self {
        menu.rates
    }
}

impl FromStr for DiscountMenu {
    type Err = Error;

    /// Parses a comma-separated list such as `1,2` or `0.1, 1`.
    fn from_str(s: &str) -> Result<Self> {
        let rates = s
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidParameter(format!("bad discount rate {:?}", tok.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        DiscountMenu::new(rates)
    }
}

impl fmt::Display for DiscountMenu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.rates.iter().map(|r| r.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Per-node acceptance probabilities over the menu, `p_v(d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdoptionModel {
    node_count: usize,
    levels: usize,
    table: Vec<f64>,
}

impl AdoptionModel {
    /// `table[v * levels + l]` is the probability that `v` accepts rate level `l`.
    /// Enforces the range and the monotonic condition exactly.
    pub fn new(node_count: usize, levels: usize, table: Vec<f64>) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Validation("adoption model needs at least one rate".into()));
        }
        if table.len() != node_count * levels {
            return Err(Error::Validation(format!(
                "adoption table has {} entries, expected {}",
                table.len(),
                node_count * levels
            )));
        }
        for v in 0..node_count {
            let row = &table[v * levels..(v + 1) * levels];
            for (l, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Validation(format!(
                        "adoption probability {p} of node {v} at level {l} outside [0, 1]"
                    )));
                }
            }
            if let Some(l) = (1..levels).find(|&l| row[l] < row[l - 1]) {
                return Err(Error::Validation(format!(
                    "adoption probabilities of node {v} decrease from {} to {} between levels {} and {}",
                    row[l - 1],
                    row[l],
                    l - 1,
                    l
                )));
            }
        }
        Ok(AdoptionModel {
            node_count,
            levels,
            table,
        })
    }

    /// Same acceptance row for every node.
    pub fn uniform(node_count: usize, row: &[f64]) -> Result<Self> {
        let table = (0..node_count).flat_map(|_| row.iter().copied()).collect();
        AdoptionModel::new(node_count, row.len(), table)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn prob(&self, v: NodeId, level: usize) -> f64 {
        self.table[v * self.levels + level]
    }

    /// `p_v(d)`, with an unassigned node (`None`) accepting with probability 0.
    #[inline]
    pub fn prob_at(&self, v: NodeId, level: Option<usize>) -> f64 {
        level.map_or(0.0, |l| self.prob(v, l))
    }

    pub fn row(&self, v: NodeId) -> &[f64] {
        &self.table[v * self.levels..(v + 1) * self.levels]
    }
}

/// Seed-discount pair `<v(h), d(h)>`; `level` indexes the discount menu.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeedDiscountPair {
    pub node: NodeId,
    pub level: usize,
}

impl SeedDiscountPair {
    pub fn new(node: NodeId, level: usize) -> Self {
        SeedDiscountPair { node, level }
    }
}

/// Mapping between external node labels and dense ids, in first-seen order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeLabels {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl NodeLabels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Labels `0..n` in order, for programmatically built instances.
    pub fn numeric(n: usize) -> Self {
        let mut labels = NodeLabels::new();
        for v in 0..n {
            labels.intern(&v.to_string());
        }
        labels
    }

    pub fn from_names<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut labels = NodeLabels::new();
        for name in names {
            let name = name.as_ref();
            if labels.get(name).is_some() {
                return Err(Error::Validation(format!("duplicate node label {name:?}")));
            }
            labels.intern(name);
        }
        Ok(labels)
    }

    pub fn intern(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// A complete problem instance: network, menu, adoption model and labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub graph: SocialGraph,
    pub menu: DiscountMenu,
    pub model: AdoptionModel,
    pub labels: NodeLabels,
}

impl Instance {
    pub fn new(
        graph: SocialGraph,
        menu: DiscountMenu,
        model: AdoptionModel,
        labels: NodeLabels,
    ) -> Result<Self> {
        if model.node_count() != graph.node_count() {
            return Err(Error::Validation(format!(
                "adoption model covers {} nodes but the graph has {}",
                model.node_count(),
                graph.node_count()
            )));
        }
        if model.levels() != menu.len() {
            return Err(Error::Validation(format!(
                "adoption model covers {} rates but the menu has {}",
                model.levels(),
                menu.len()
            )));
        }
        if labels.len() != graph.node_count() {
            return Err(Error::Validation(format!(
                "{} labels for {} nodes",
                labels.len(),
                graph.node_count()
            )));
        }
        Ok(Instance {
            graph,
            menu,
            model,
            labels,
        })
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn rate(&self, pair: SeedDiscountPair) -> f64 {
        self.menu.rate(pair.level)
    }

    /// Every pair in `V x D`, ordered by node then level.
    pub fn all_pairs(&self) -> impl Iterator<Item = SeedDiscountPair> + '_ {
        let m = self.menu.len();
        (0..self.node_count()).flat_map(move |v| (0..m).map(move |l| SeedDiscountPair::new(v, l)))
    }
}
