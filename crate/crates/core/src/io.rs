//! Instance files.
//!
//! Graph file: one edge per line, `<src> <dst> <p>`, whitespace separated,
//! `#` starts a comment. An optional first line `nodes <n>` declares the node
//! set as the labels `0..n`, which allows isolated nodes; without it, nodes are
//! the labels mentioned by `node <label>` lines and edges, numbered in
//! first-seen order.
//!
//! Adoption file: lines `<node> <rate> <prob>`. The node `*` is a wildcard row
//! that applies to every node; explicit rows override it.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{AdoptionModel, DiscountMenu, Edge, Instance, NodeLabels, SocialGraph};

fn tokens(line: &str) -> Vec<&str> {
    let content = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    content.split_whitespace().collect()
}

fn parse_prob(tok: &str, origin: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|p| !p.is_nan())
        .ok_or_else(|| Error::parse(origin, line, format!("bad probability {tok:?}")))
}

pub fn parse_graph(text: &str, origin: &str) -> Result<(NodeLabels, SocialGraph)> {
    let mut labels = NodeLabels::new();
    let mut declared: Option<usize> = None;
    let mut edges = Vec::new();
    let mut seen_content = false;
    let mut seen_edges = std::collections::HashSet::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let toks = tokens(raw);
        if toks.is_empty() {
            continue;
        }
        if toks[0] == "nodes" && toks.len() != 3 {
            if seen_content {
                return Err(Error::parse(origin, lineno, "`nodes` header must come before any edge"));
            }
            if toks.len() != 2 {
                return Err(Error::parse(origin, lineno, "expected `nodes <n>`"));
            }
            let n: usize = toks[1]
                .parse()
                .map_err(|_| Error::parse(origin, lineno, format!("bad node count {:?}", toks[1])))?;
            for v in 0..n {
                labels.intern(&v.to_string());
            }
            declared = Some(n);
            seen_content = true;
            continue;
        }
        if toks[0] == "node" && toks.len() == 2 {
            seen_content = true;
            match declared {
                Some(n) if labels.get(toks[1]).is_none() => {
                    return Err(Error::Validation(format!(
                        "{origin}:{lineno}: node {:?} is not one of the {n} declared nodes 0..{n}",
                        toks[1]
                    )))
                }
                Some(_) => {}
                None => {
                    labels.intern(toks[1]);
                }
            }
            continue;
        }
        seen_content = true;
        if toks.len() != 3 {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected `<src> <dst> <p>`, found {} fields", toks.len()),
            ));
        }
        let p = parse_prob(toks[2], origin, lineno)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Validation(format!(
                "{origin}:{lineno}: propagation probability {p} outside [0, 1]"
            )));
        }
        let mut id = |label: &str| -> Result<usize> {
            match declared {
                Some(n) => labels.get(label).ok_or_else(|| {
                    Error::Validation(format!(
                        "{origin}:{lineno}: node {label:?} is not one of the {n} declared nodes 0..{n}"
                    ))
                }),
                None => Ok(labels.intern(label)),
            }
        };
        let source = id(toks[0])?;
        let target = id(toks[1])?;
        if source == target {
            return Err(Error::Validation(format!(
                "{origin}:{lineno}: self-loop on node {:?}",
                toks[0]
            )));
        }
        if !seen_edges.insert((source, target)) {
            return Err(Error::Validation(format!(
                "{origin}:{lineno}: duplicate edge {} -> {}",
                toks[0], toks[1]
            )));
        }
        edges.push(Edge {
            source,
            target,
            prob: p,
        });
    }

    if labels.is_empty() {
        return Err(Error::Validation(format!(
            "{origin}: graph has no nodes (add a `nodes <n>` header for edgeless graphs)"
        )));
    }
    let graph = SocialGraph::new(labels.len(), edges)?;
    Ok((labels, graph))
}

pub fn parse_adoption(
    text: &str,
    origin: &str,
    labels: &NodeLabels,
    menu: &DiscountMenu,
) -> Result<AdoptionModel> {
    let n = labels.len();
    let m = menu.len();
    let mut wildcard: Vec<Option<f64>> = vec![None; m];
    let mut explicit: Vec<Option<f64>> = vec![None; n * m];

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let toks = tokens(raw);
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 3 {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected `<node> <rate> <prob>`, found {} fields", toks.len()),
            ));
        }
        let rate: f64 = toks[1]
            .parse()
            .map_err(|_| Error::parse(origin, lineno, format!("bad rate {:?}", toks[1])))?;
        let level = menu.level_of(rate).ok_or_else(|| {
            Error::Validation(format!(
                "{origin}:{lineno}: rate {rate} is not in the discount menu {menu}"
            ))
        })?;
        let p = parse_prob(toks[2], origin, lineno)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Validation(format!(
                "{origin}:{lineno}: adoption probability {p} outside [0, 1]"
            )));
        }
        let slot = if toks[0] == "*" {
            &mut wildcard[level]
        } else {
            let v = labels.get(toks[0]).ok_or_else(|| {
                Error::Validation(format!("{origin}:{lineno}: unknown node {:?}", toks[0]))
            })?;
            &mut explicit[v * m + level]
        };
        if slot.is_some() {
            return Err(Error::Validation(format!(
                "{origin}:{lineno}: duplicate entry for node {:?} at rate {rate}",
                toks[0]
            )));
        }
        *slot = Some(p);
    }

    let mut table = Vec::with_capacity(n * m);
    for v in 0..n {
        for l in 0..m {
            let p = explicit[v * m + l].or(wildcard[l]).ok_or_else(|| {
                Error::Validation(format!(
                    "{origin}: no adoption probability for node {:?} at rate {}",
                    labels.name(v),
                    menu.rate(l)
                ))
            })?;
            table.push(p);
        }
    }
    AdoptionModel::new(n, m, table).map_err(|e| match e {
        Error::Validation(msg) => Error::Validation(format!("{origin}: {msg}")),
        other => other,
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads and validates a graph file and an adoption file against `menu`.
pub fn load_instance(graph_file: &Path, adoption_file: &Path, menu: DiscountMenu) -> Result<Instance> {
    let graph_text = read(graph_file)?;
    let adoption_text = read(adoption_file)?;
    let (labels, graph) = parse_graph(&graph_text, &graph_file.display().to_string())?;
    let model = parse_adoption(
        &adoption_text,
        &adoption_file.display().to_string(),
        &labels,
        &menu,
    )?;
    Instance::new(graph, menu, model, labels)
}

/// Graph file text for `instance`; always carries a `nodes` header when the
/// labels are exactly `0..n`.
pub fn format_graph(instance: &Instance) -> String {
    let mut out = String::new();
    let labels = &instance.labels;
    let numeric = labels
        .names()
        .iter()
        .enumerate()
        .all(|(i, name)| *name == i.to_string());
    if numeric {
        let _ = writeln!(out, "nodes {}", instance.node_count());
    } else {
        // Declaring every label up front keeps ids and isolated nodes.
        for name in labels.names() {
            let _ = writeln!(out, "node {name}");
        }
    }
    for e in instance.graph.edges() {
        let _ = writeln!(
            out,
            "{} {} {}",
            labels.name(e.source),
            labels.name(e.target),
            e.prob
        );
    }
    out
}

/// Adoption file text; rows identical across all nodes collapse to wildcards.
pub fn format_adoption(instance: &Instance) -> String {
    let mut out = String::new();
    let model = &instance.model;
    let n = instance.node_count();
    let uniform = n > 0 && (1..n).all(|v| model.row(v) == model.row(0));
    if uniform {
        for (l, &p) in model.row(0).iter().enumerate() {
            let _ = writeln!(out, "* {} {}", instance.menu.rate(l), p);
        }
        return out;
    }
    for v in 0..n {
        for (l, &p) in model.row(v).iter().enumerate() {
            let _ = writeln!(out, "{} {} {}", instance.labels.name(v), instance.menu.rate(l), p);
        }
    }
    out
}

pub fn write_instance(instance: &Instance, graph_file: &Path, adoption_file: &Path) -> Result<()> {
    fs::write(graph_file, format_graph(instance)).map_err(|e| Error::io(graph_file, e))?;
    fs::write(adoption_file, format_adoption(instance)).map_err(|e| Error::io(adoption_file, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1_GRAPH: &str = "# toy network\na b 0.2\na c 0.2\nb d 0.5\nc d 0.5\nd e 0.1\n";

    fn menu12() -> DiscountMenu {
        DiscountMenu::new(vec![1.0, 2.0]).unwrap()
    }

    #[test]
    fn parses_labels_in_first_seen_order() {
        let (labels, g) = parse_graph(FIG1_GRAPH, "g").unwrap();
        assert_eq!(labels.names(), &["a", "b", "c", "d", "e"]);
        assert_eq!(g.edge_count(), 5);
        assert_eq!(g.edge(4).prob, 0.1);
    }

    #[test]
    fn nodes_header_declares_isolated_nodes() {
        let (labels, g) = parse_graph("nodes 1\n", "g").unwrap();
        assert_eq!(labels.len(), 1);
        assert_eq!(g.edge_count(), 0);
        let (_, g) = parse_graph("nodes 4\n0 1 0.5\n", "g").unwrap();
        assert_eq!(g.node_count(), 4);
        assert!(parse_graph("nodes 2\n0 5 0.5\n", "g").is_err());
        assert!(parse_graph("0 1 0.5\nnodes 2\n", "g").is_err());
        assert!(parse_graph("", "g").is_err());
    }

    #[test]
    fn reports_line_numbers_on_malformed_input() {
        let err = parse_graph("a b 0.1\n\na c\n", "graph.txt").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(err.to_string().starts_with("graph.txt:3:"));
        let err = parse_graph("a b x\n", "g").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn graph_validation_errors() {
        assert!(matches!(parse_graph("a b 1.2\n", "g"), Err(Error::Validation(_))));
        assert!(matches!(parse_graph("a a 0.2\n", "g"), Err(Error::Validation(_))));
        let err = parse_graph("a b 0.2\na b 0.3\n", "g").unwrap_err();
        assert!(err.to_string().contains("duplicate edge"), "{err}");
    }

    #[test]
    fn wildcard_rows_are_overridden_by_explicit_rows() {
        let (labels, _) = parse_graph(FIG1_GRAPH, "g").unwrap();
        let model = parse_adoption("* 1 0.5\n* 2 1\nc 1 0.25\n", "a", &labels, &menu12()).unwrap();
        assert_eq!(model.prob(0, 0), 0.5);
        assert_eq!(model.prob(2, 0), 0.25);
        assert_eq!(model.prob(2, 1), 1.0);
    }

    #[test]
    fn adoption_validation_errors() {
        let (labels, _) = parse_graph("nodes 1\n", "g").unwrap();
        let menu = menu12();
        let err = parse_adoption("0 1 0.6\n0 2 0.4\n", "a", &labels, &menu).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("decrease"), "{err}");
        let err = parse_adoption("0 1 0.6\n", "a", &labels, &menu).unwrap_err();
        assert!(err.to_string().contains("no adoption probability"), "{err}");
        assert!(parse_adoption("0 3 0.6\n", "a", &labels, &menu).is_err());
        assert!(parse_adoption("0 1 1.5\n0 2 1\n", "a", &labels, &menu).is_err());
        assert!(parse_adoption("x 1 0.5\n", "a", &labels, &menu).is_err());
        assert!(parse_adoption("0 1 0.5\n0 1 0.5\n0 2 1\n", "a", &labels, &menu).is_err());
        let err = parse_adoption("0 1\n", "a", &labels, &menu).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn formatted_instance_reparses_identically() {
        let (labels, graph) = parse_graph(FIG1_GRAPH, "g").unwrap();
        let model = parse_adoption("* 1 0.5\n* 2 1\nc 1 0.25\n", "a", &labels, &menu12()).unwrap();
        let inst = Instance::new(graph, menu12(), model, labels).unwrap();
        let (labels2, graph2) = parse_graph(&format_graph(&inst), "g").unwrap();
        let model2 = parse_adoption(&format_adoption(&inst), "a", &labels2, &menu12()).unwrap();
        assert_eq!(labels2, inst.labels);
        assert_eq!(graph2, inst.graph);
        assert_eq!(model2, inst.model);
    }

    #[test]
    fn node_lines_declare_isolated_labelled_nodes() {
        let (labels, graph) = parse_graph("node x\nnode y\ny z 1\n", "g").unwrap();
        assert_eq!(labels.names(), ["x", "y", "z"]);
        assert_eq!(graph.node_count(), 3);
        // a three-token line starting with `node` is still an edge
        let (labels, _) = parse_graph("node b 0.5\n", "g").unwrap();
        assert_eq!(labels.names(), ["node", "b"]);
        assert!(parse_graph("nodes 2\nnode 5\n", "g").is_err());
    }

    #[test]
    fn worstcase_round_trips_with_its_isolated_node() {
        let inst = crate::instances::worstcase(4).unwrap();
        let (labels, graph) = parse_graph(&format_graph(&inst), "g").unwrap();
        assert_eq!(labels, inst.labels);
        assert_eq!(graph, inst.graph);
    }
}
