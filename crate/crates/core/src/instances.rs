//! Named instance constructions: the five-node toy network, its scripted
//! adaptive walkthrough, the greedy worst case and random graphs.

use rand::Rng;

use crate::cascade::{DiffusionRealization, SeedingRealization};
use crate::error::{Error, Result};
use crate::graph::{AdoptionModel, DiscountMenu, Edge, Instance, NodeLabels, SocialGraph};
use crate::rng::RngStream;

/// Toy network: `a->b 0.2, a->c 0.2, b->d 0.5, c->d 0.5, d->e 0.1`,
/// menu `{1, 2}`, and `p_u(1) = 0.5, p_u(2) = 1` for every user.
pub fn fig1() -> Instance {
    let labels = NodeLabels::from_names(["a", "b", "c", "d", "e"]).expect("distinct labels");
    let edge = |source, target, prob| Edge {
        source,
        target,
        prob,
    };
    let graph = SocialGraph::new(
        5,
        vec![
            edge(0, 1, 0.2),
            edge(0, 2, 0.2),
            edge(1, 3, 0.5),
            edge(2, 3, 0.5),
            edge(3, 4, 0.1),
        ],
    )
    .expect("valid toy graph");
    let menu = DiscountMenu::new(vec![1.0, 2.0]).expect("valid menu");
    let model = AdoptionModel::uniform(5, &[0.5, 1.0]).expect("valid model");
    Instance::new(graph, menu, model, labels).expect("consistent instance")
}

/// Scripted realization of the adaptive walkthrough on [`fig1`]: `a` and `d`
/// accept rate 1, `c` only accepts rate 2; `a->b` and `d->e` are live, the
/// other edges blocked.
pub fn fig2_realization(instance: &Instance) -> (SeedingRealization, DiffusionRealization) {
    let seeding =
        SeedingRealization::from_thresholds(&instance.model, vec![0.3, 0.9, 0.7, 0.2, 0.9])
            .expect("valid thresholds");
    let g = &instance.graph;
    let mut diffusion = DiffusionRealization::all(g, false);
    for (u, v) in [(0, 1), (3, 4)] {
        diffusion.set(g.find_edge(u, v).expect("toy edge"), true);
    }
    (seeding, diffusion)
}

/// Isolated node `x` plus a clique of `n - 1` nodes joined by certain edges.
/// Menu `{1/n, 1}`; `x` accepts either rate, clique nodes only rate 1.
pub fn worstcase(n: usize) -> Result<Instance> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "worst-case instance needs n >= 2, got {n}"
        )));
    }
    let mut names = vec!["x".to_string()];
    names.extend((1..n).map(|i| format!("y{i}")));
    let labels = NodeLabels::from_names(&names)?;
    let mut edges = Vec::new();
    for u in 1..n {
        for v in 1..n {
            if u != v {
                edges.push(Edge {
                    source: u,
                    target: v,
                    prob: 1.0,
                });
            }
        }
    }
    let graph = SocialGraph::new(n, edges)?;
    let menu = DiscountMenu::new(vec![1.0 / n as f64, 1.0])?;
    let mut table = vec![1.0, 1.0];
    for _ in 1..n {
        table.extend([0.0, 1.0]);
    }
    let model = AdoptionModel::new(n, 2, table)?;
    Instance::new(graph, menu, model, labels)
}

/// Propagation probabilities of random graphs are drawn from this set.
pub const TRIVALENCY: [f64; 3] = [0.1, 0.01, 0.001];

/// Directed Erdős–Rényi graph: each ordered pair is an edge with probability
/// `edge_prob`; propagation probabilities from [`TRIVALENCY`]; each node's
/// adoption row is a sorted vector of uniform draws.
pub fn random(n: usize, edge_prob: f64, menu: DiscountMenu, seed: u64) -> Result<Instance> {
    if n == 0 {
        return Err(Error::InvalidParameter("random instance needs n >= 1".into()));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidParameter(format!(
            "edge probability {edge_prob} outside [0, 1]"
        )));
    }
    let mut rng = RngStream::new(seed).rng();
    let slots = n as u64 * (n as u64 - 1);
    let mut edges = Vec::new();
    if edge_prob > 0.0 && slots > 0 {
        let log_q = (1.0 - edge_prob).ln();
        let mut k: u64 = 0;
        loop {
            if edge_prob < 1.0 {
                let u: f64 = rng.random();
                let skip = ((1.0 - u).ln() / log_q).floor();
                if !skip.is_finite() || skip >= (slots - k) as f64 {
                    break;
                }
                k += skip as u64;
            }
            if k >= slots {
                break;
            }
            let source = (k / (n as u64 - 1)) as usize;
            let j = (k % (n as u64 - 1)) as usize;
            let target = if j < source { j } else { j + 1 };
            edges.push(Edge {
                source,
                target,
                prob: TRIVALENCY[rng.random_range(0..TRIVALENCY.len())],
            });
            k += 1;
        }
    }
    let m = menu.len();
    let mut table = Vec::with_capacity(n * m);
    for _ in 0..n {
        let mut row: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
        row.sort_by(f64::total_cmp);
        table.extend(row);
    }
    let graph = SocialGraph::new(n, edges)?;
    let model = AdoptionModel::new(n, m, table)?;
    Instance::new(graph, menu, model, NodeLabels::numeric(n))
}
