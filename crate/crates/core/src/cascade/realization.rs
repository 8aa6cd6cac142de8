use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{AdoptionModel, EdgeId, Instance, NodeId, SocialGraph};
use crate::rng::{tags, RngStream};

/// Pre-sampled adoption thresholds `g_v` and the induced minimum accepted
/// discount level per node.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedingRealization {
    thresholds: Vec<f64>,
    min_level: Vec<Option<usize>>,
}

/// Smallest level `l` with `p_v(l) >= g`, if any. Equality counts as acceptance.
#[inline]
pub fn min_accepted_level(row: &[f64], threshold: f64) -> Option<usize> {
    row.iter().position(|&p| p >= threshold)
}

impl SeedingRealization {
    pub fn from_thresholds(model: &AdoptionModel, thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.len() != model.node_count() {
            return Err(Error::Validation(format!(
                "{} thresholds for {} nodes",
                thresholds.len(),
                model.node_count()
            )));
        }
        if let Some((v, g)) = thresholds
            .iter()
            .enumerate()
            .find(|(_, g)| !(0.0..=1.0).contains(*g))
        {
            return Err(Error::Validation(format!(
                "threshold {g} of node {v} outside [0, 1]"
            )));
        }
        let min_level = thresholds
            .iter()
            .enumerate()
            .map(|(v, &g)| min_accepted_level(model.row(v), g))
            .collect();
        Ok(SeedingRealization {
            thresholds,
            min_level,
        })
    }

    /// Builds a realization directly from minimum accepted levels, choosing for
    /// each node the representative threshold at the top of its interval.
    pub fn from_min_levels(model: &AdoptionModel, levels: &[Option<usize>]) -> Result<Self> {
        let thresholds = levels
            .iter()
            .enumerate()
            .map(|(v, level)| match *level {
                Some(l) => model.prob(v, l),
                None => 1.0,
            })
            .collect();
        let real = SeedingRealization::from_thresholds(model, thresholds)?;
        if real.min_level != levels {
            return Err(Error::Validation(
                "minimum levels are not realizable under the adoption model".into(),
            ));
        }
        Ok(real)
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// `d_v` as a menu level; `None` stands for "never accepts".
    #[inline]
    pub fn min_level(&self, v: NodeId) -> Option<usize> {
        self.min_level[v]
    }

    #[inline]
    pub fn accepts(&self, v: NodeId, level: usize) -> bool {
        self.min_level[v].is_some_and(|d| d <= level)
    }
}

/// Live/blocked state of every edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffusionRealization {
    live: Vec<bool>,
}

impl DiffusionRealization {
    pub fn new(graph: &SocialGraph, live: Vec<bool>) -> Result<Self> {
        if live.len() != graph.edge_count() {
            return Err(Error::Validation(format!(
                "{} edge states for {} edges",
                live.len(),
                graph.edge_count()
            )));
        }
        Ok(DiffusionRealization { live })
    }

    pub fn all(graph: &SocialGraph, live: bool) -> Self {
        DiffusionRealization {
            live: vec![live; graph.edge_count()],
        }
    }

    #[inline]
    pub fn is_live(&self, e: EdgeId) -> bool {
        self.live[e]
    }

    pub fn states(&self) -> &[bool] {
        &self.live
    }

    pub fn set(&mut self, e: EdgeId, live: bool) {
        self.live[e] = live;
    }
}

/// Threshold of node `v` in a stream: uniform on `(0, 1]`, so that `p = 0`
/// never accepts and `p = 1` always does.
#[inline]
pub fn threshold_draw(stream: &RngStream, v: NodeId) -> f64 {
    stream.substream(tags::SEEDING).unit_open_closed(v as u64)
}

/// Coin of edge `e`; live iff the draw falls below `p_uv`.
#[inline]
pub fn edge_coin(diffusion_stream: &RngStream, e: EdgeId, prob: f64) -> bool {
    diffusion_stream.unit(e as u64) < prob
}

pub fn sample_seeding(model: &AdoptionModel, stream: &RngStream) -> SeedingRealization {
    let thresholds = (0..model.node_count())
        .map(|v| threshold_draw(stream, v))
        .collect();
    SeedingRealization::from_thresholds(model, thresholds).expect("draws lie in (0, 1]")
}

pub fn sample_diffusion(graph: &SocialGraph, stream: &RngStream) -> DiffusionRealization {
    let diffusion = stream.substream(tags::DIFFUSION);
    DiffusionRealization {
        live: graph
            .edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| edge_coin(&diffusion, e, edge.prob))
            .collect(),
    }
}

/// Text form: `threshold <node> <g>` lines, then `edge <src> <dst> live|blocked`.
pub fn format_realization(
    instance: &Instance,
    seeding: &SeedingRealization,
    diffusion: &DiffusionRealization,
) -> String {
    let mut out = String::new();
    for (v, g) in seeding.thresholds().iter().enumerate() {
        let _ = writeln!(out, "threshold {} {}", instance.labels.name(v), g);
    }
    for (e, edge) in instance.graph.edges().iter().enumerate() {
        let _ = writeln!(
            out,
            "edge {} {} {}",
            instance.labels.name(edge.source),
            instance.labels.name(edge.target),
            if diffusion.is_live(e) { "live" } else { "blocked" }
        );
    }
    out
}

pub fn parse_realization(
    text: &str,
    origin: &str,
    instance: &Instance,
) -> Result<(SeedingRealization, DiffusionRealization)> {
    let n = instance.node_count();
    let graph = &instance.graph;
    let mut thresholds: Vec<Option<f64>> = vec![None; n];
    let mut states: Vec<Option<bool>> = vec![None; graph.edge_count()];

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let node = |label: &str| {
            instance.labels.get(label).ok_or_else(|| {
                Error::parse(origin, lineno, format!("unknown node {label:?}"))
            })
        };
        match (toks[0], toks.len()) {
            ("threshold", 3) => {
                let v = node(toks[1])?;
                let g: f64 = toks[2].parse().map_err(|_| {
                    Error::parse(origin, lineno, format!("bad threshold {:?}", toks[2]))
                })?;
                if thresholds[v].replace(g).is_some() {
                    return Err(Error::parse(origin, lineno, "duplicate threshold"));
                }
            }
            ("edge", 4) => {
                let (u, v) = (node(toks[1])?, node(toks[2])?);
                let e = graph.find_edge(u, v).ok_or_else(|| {
                    Error::parse(origin, lineno, format!("no edge {} -> {}", toks[1], toks[2]))
                })?;
                let live = match toks[3] {
                    "live" => true,
                    "blocked" => false,
                    other => {
                        return Err(Error::parse(
                            origin,
                            lineno,
                            format!("edge state must be live or blocked, found {other:?}"),
                        ))
                    }
                };
                if states[e].replace(live).is_some() {
                    return Err(Error::parse(origin, lineno, "duplicate edge state"));
                }
            }
            _ => {
                return Err(Error::parse(
                    origin,
                    lineno,
                    "expected `threshold <node> <g>` or `edge <src> <dst> live|blocked`",
                ))
            }
        }
    }

    let thresholds = thresholds
        .into_iter()
        .enumerate()
        .map(|(v, g)| {
            g.ok_or_else(|| {
                Error::Validation(format!(
                    "{origin}: realization has no threshold for node {:?}",
                    instance.labels.name(v)
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let live = states
        .into_iter()
        .enumerate()
        .map(|(e, s)| {
            s.ok_or_else(|| {
                let edge = graph.edge(e);
                Error::Validation(format!(
                    "{origin}: realization has no state for edge {} -> {}",
                    instance.labels.name(edge.source),
                    instance.labels.name(edge.target)
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((
        SeedingRealization::from_thresholds(&instance.model, thresholds)?,
        DiffusionRealization::new(graph, live)?,
    ))
}
