//! Graph file formats and CI statement rendering.
//!
//! Text format, one declaration per line, `#` starts a comment:
//!
//! ```text
//! node A
//! latent U
//! edge A -> B
//! edge A <-> C
//! order A B C
//! ```
//!
//! The JSON form carries the same content:
//! `{"nodes": [...], "latents": [...], "directed": [[a, b], ...],
//!   "bidirected": [[a, b], ...], "order": [...]}`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clmp::CiStatement;
use crate::error::Error;
use crate::graph::{CausalGraph, GraphBuilder};
use crate::nodeset::NodeSet;
use crate::order::{check_order, VariableOrder};

pub const GRAPH_FORMAT_VERSION: u32 = 1;
pub const CI_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{source} at line {line}")]
    Graph { line: usize, source: Error },
    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid JSON graph: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid graph: {0}")]
    Invalid(Error),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// A parsed graph plus the order embedded in the file, if any.
#[derive(Debug, Clone)]
pub struct GraphFile {
    pub graph: CausalGraph,
    pub order: Option<VariableOrder>,
}

pub fn parse_graph_text(text: &str) -> Result<GraphFile, ParseError> {
    let mut b = GraphBuilder::new();
    let mut order_line: Option<(usize, Vec<&str>)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let at = |source| ParseError::Graph { line, source };
        let syntax = |message: &str| ParseError::Syntax { line, message: message.to_string() };
        match tokens.as_slice() {
            [] => {}
            ["node", name] => {
                b.add_node(name).map_err(at)?;
            }
            ["latent", name] => {
                b.add_latent(name).map_err(at)?;
            }
            ["edge", a, "->", h] => b.add_directed_by_name(a, h).map_err(at)?,
            ["edge", a, "<->", c] => b.add_bidirected_by_name(a, c).map_err(at)?,
            ["edge", ..] => return Err(syntax("expected `edge A -> B` or `edge A <-> B`")),
            ["node" | "latent", ..] => return Err(syntax("expected exactly one node name")),
            ["order", names @ ..] => {
                if order_line.is_some() {
                    return Err(syntax("duplicate order declaration"));
                }
                order_line = Some((line, names.to_vec()));
            }
            [kw, ..] => return Err(syntax(&format!("unknown declaration `{kw}`"))),
        }
    }
    let graph = b.build();
    let order = match order_line {
        None => None,
        Some((line, names)) => {
            let at = |source| ParseError::Graph { line, source };
            let o = VariableOrder::from_names(&graph, &names).map_err(at)?;
            check_order(&graph, &o).map_err(at)?;
            Some(o)
        }
    };
    Ok(GraphFile { graph, order })
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    nodes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    latents: Vec<String>,
    #[serde(default)]
    directed: Vec<[String; 2]>,
    #[serde(default)]
    bidirected: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<Vec<String>>,
}

pub fn parse_graph_json(text: &str) -> Result<GraphFile, ParseError> {
    let doc: GraphDoc = serde_json::from_str(text)?;
    let mut b = GraphBuilder::new();
    let invalid = ParseError::Invalid;
    for n in &doc.nodes {
        b.add_node(n).map_err(invalid)?;
    }
    for n in &doc.latents {
        b.add_latent(n).map_err(invalid)?;
    }
    for [t, h] in &doc.directed {
        b.add_directed_by_name(t, h).map_err(invalid)?;
    }
    for [x, y] in &doc.bidirected {
        b.add_bidirected_by_name(x, y).map_err(invalid)?;
    }
    let graph = b.build();
    let order = match &doc.order {
        None => None,
        Some(names) => {
            let o = VariableOrder::from_names(&graph, names).map_err(invalid)?;
            check_order(&graph, &o).map_err(invalid)?;
            Some(o)
        }
    };
    Ok(GraphFile { graph, order })
}

/// Parses either format, choosing JSON when the first non-blank character
/// is `{`.
pub fn parse_graph(text: &str) -> Result<GraphFile, ParseError> {
    if text.trim_start().starts_with('{') {
        parse_graph_json(text)
    } else {
        parse_graph_text(text)
    }
}

pub fn read_graph_file(path: &Path) -> Result<GraphFile, ParseError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ParseError::Io { path: path.display().to_string(), source })?;
    parse_graph(&text)
}

/// Renders a graph in the text format. Nodes are written in index order so
/// parsing the output reproduces the same indices.
pub fn write_graph_text(g: &CausalGraph, order: Option<&VariableOrder>) -> String {
    let mut out = String::new();
    for v in 0..g.node_count() {
        let kw = if g.is_latent(v) { "latent" } else { "node" };
        let _ = writeln!(out, "{kw} {}", g.name(v));
    }
    for (t, h) in g.directed_edges() {
        let _ = writeln!(out, "edge {} -> {}", g.name(t), g.name(h));
    }
    for (a, b) in g.bidirected_edges() {
        let _ = writeln!(out, "edge {} <-> {}", g.name(a), g.name(b));
    }
    if let Some(o) = order {
        let names: Vec<&str> = o.sequence().iter().map(|&v| g.name(v)).collect();
        let _ = writeln!(out, "order {}", names.join(" "));
    }
    out
}

pub fn write_graph_json(g: &CausalGraph, order: Option<&VariableOrder>) -> String {
    let pair = |a: usize, b: usize| [g.name(a).to_string(), g.name(b).to_string()];
    let doc = GraphDoc {
        nodes: g.observed().iter().map(|v| g.name(v).to_string()).collect(),
        latents: (0..g.node_count()).filter(|&v| g.is_latent(v)).map(|v| g.name(v).to_string()).collect(),
        directed: g.directed_edges().into_iter().map(|(t, h)| pair(t, h)).collect(),
        bidirected: g.bidirected_edges().into_iter().map(|(a, b)| pair(a, b)).collect(),
        order: order.map(|o| o.sequence().iter().map(|&v| g.name(v).to_string()).collect()),
    };
    serde_json::to_string_pretty(&doc).expect("graph documents always serialize")
}

/// Comma-joined member names in name order; `{}` for the empty set.
pub fn join_names(g: &CausalGraph, set: &NodeSet) -> String {
    if set.is_empty() {
        return "{}".to_string();
    }
    g.sorted_names(set).join(",")
}

fn ci_line(g: &CausalGraph, x: &str, w: &NodeSet, z: &NodeSet) -> String {
    let mut s = format!("{x} _||_ {}", join_names(g, w));
    if !z.is_empty() {
        s.push_str(" | ");
        s.push_str(&join_names(g, z));
    }
    s
}

/// `X _||_ W1,W2 | Z1,Z2`, with the `| ...` part omitted when Z is empty.
pub fn format_ci(g: &CausalGraph, ci: &CiStatement) -> String {
    ci_line(g, g.name(ci.x), &ci.w, &ci.z)
}

/// Same layout for set-valued left-hand sides.
pub fn format_set_ci(g: &CausalGraph, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> String {
    ci_line(g, &join_names(g, x), y, z)
}

#[derive(Serialize)]
struct CiRecord<'a> {
    x: &'a str,
    w: Vec<&'a str>,
    z: Vec<&'a str>,
}

#[derive(Serialize)]
struct SetCiRecord<'a> {
    x: Vec<&'a str>,
    y: Vec<&'a str>,
    z: Vec<&'a str>,
}

/// One-line JSON object `{"x": ..., "w": [...], "z": [...]}`.
pub fn ci_json(g: &CausalGraph, ci: &CiStatement) -> String {
    let rec = CiRecord { x: g.name(ci.x), w: g.sorted_names(&ci.w), z: g.sorted_names(&ci.z) };
    serde_json::to_string(&rec).expect("string records always serialize")
}

pub fn set_ci_json(g: &CausalGraph, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> String {
    let rec = SetCiRecord { x: g.sorted_names(x), y: g.sorted_names(y), z: g.sorted_names(z) };
    serde_json::to_string(&rec).expect("string records always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const G2: &str = include_str!("../../../fixtures/g2.graph");

    #[test]
    fn g2_fixture_shape() {
        let f = parse_graph_text(G2).unwrap();
        assert_eq!(f.graph.node_count(), 7);
        assert_eq!(f.graph.directed_count(), 6);
        assert_eq!(f.graph.bidirected_count(), 2);
        assert!(f.order.is_some());
    }

    #[test]
    fn self_loop_reports_line() {
        let err = parse_graph_text("node A\n\nedge A -> A\n").unwrap_err();
        assert_eq!(err.to_string(), "self-loop on `A` at line 3");
    }

    #[test]
    fn cycle_is_rejected() {
        let err = parse_graph_text("node A\nnode B\nedge A -> B\nedge B -> A\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("directed cycle"), "{msg}");
        assert!(msg.ends_with("line 4"), "{msg}");
    }

    #[test]
    fn unknown_and_duplicate_names() {
        let err = parse_graph_text("node A\nedge A -> B\n").unwrap_err();
        assert_eq!(err.to_string(), "unknown node name `B` at line 2");
        let err = parse_graph_text("node A\nlatent A\n").unwrap_err();
        assert_eq!(err.to_string(), "node `A` declared twice at line 2");
        let err = parse_graph_text("node A\nnode B\nedge A <-> B\nedge B <-> A # again\n").unwrap_err();
        assert!(matches!(err, ParseError::Graph { line: 4, .. }));
        let err = parse_graph_text("node A\nfoo bar\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, .. }));
    }

    #[test]
    fn order_line_is_validated() {
        let err = parse_graph_text("node A\nnode B\nedge A -> B\norder B A\n").unwrap_err();
        assert!(matches!(err, ParseError::Graph { line: 4, source: Error::NotTopological(..) }));
    }

    #[test]
    fn json_matches_text() {
        let text = parse_graph_text(G2).unwrap();
        let json = write_graph_json(&text.graph, text.order.as_ref());
        let back = parse_graph(&json).unwrap();
        assert_eq!(back.graph, text.graph);
        assert_eq!(back.order, text.order);
        assert!(parse_graph_json("{\"nodes\": [\"A\"], \"directed\": [[\"A\", \"Q\"]]}").is_err());
    }

    #[test]
    fn ci_lines() {
        let g = parse_graph_text(G2).unwrap().graph;
        let h = g.node("H").unwrap();
        let ci = CiStatement::new(h, g.set_of(&["F", "A", "E"]).unwrap(), g.set_of(&["D", "B", "C"]).unwrap()).unwrap();
        assert_eq!(format_ci(&g, &ci), "H _||_ A,E,F | B,C,D");
        let marginal = CiStatement::new(h, g.set_of(&["A"]).unwrap(), NodeSet::new()).unwrap();
        assert_eq!(format_ci(&g, &marginal), "H _||_ A");
        assert_eq!(ci_json(&g, &ci), r#"{"x":"H","w":["A","E","F"],"z":["B","C","D"]}"#);
    }
}
