//! Output formats for explanation graphs: Graphviz DOT, JSON and plain text.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::egraph::{EEdge, EdgeLabel, ExplanationGraph};
use crate::node::{ENode, Glyphs, NodeKind};

pub fn dot_style(label: EdgeLabel) -> &'static str {
    match label {
        EdgeLabel::Plus => "style=solid",
        EdgeLabel::Minus => "style=dashed",
        EdgeLabel::Circ => "style=dotted",
        EdgeLabel::Bullet => "style=dotted, color=orange",
        EdgeLabel::Diamond => "style=dotted, color=green",
        EdgeLabel::Oplus => "style=solid, color=blue",
        EdgeLabel::Oslash => "style=solid, color=gray",
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn to_dot(g: &ExplanationGraph, glyphs: Glyphs) -> String {
    let mut out = String::from("digraph egraph {\n");
    for n in &g.nodes {
        let shape = if n.is_terminal() { "plaintext" } else { "box" };
        writeln!(out, "  {} [shape={shape}];", quote(&n.label(glyphs))).unwrap();
    }
    for e in &g.edges {
        writeln!(
            out,
            "  {} -> {} [{}];",
            quote(&e.from.label(glyphs)),
            quote(&e.to.label(glyphs)),
            dot_style(e.label)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// Content hash identifying a node in JSON output.
pub fn node_id(n: &ENode) -> String {
    let digest = Sha256::digest(format!(
        "{}\n{}",
        n.kind().as_str(),
        n.label(Glyphs::Unicode)
    ));
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn to_json_value(g: &ExplanationGraph, glyphs: Glyphs) -> Value {
    let nodes: Vec<Value> = g
        .nodes
        .iter()
        .map(|n| json!({"id": node_id(n), "kind": n.kind().as_str(), "label": n.label(glyphs)}))
        .collect();
    let edges: Vec<Value> = g
        .edges
        .iter()
        .map(|e| json!({"from": node_id(&e.from), "to": node_id(&e.to), "label": e.label.as_str()}))
        .collect();
    json!({"root": node_id(&g.root), "nodes": nodes, "edges": edges})
}

pub fn to_json(g: &ExplanationGraph, glyphs: Glyphs) -> String {
    let mut s = serde_json::to_string_pretty(&to_json_value(g, glyphs)).expect("serializable");
    s.push('\n');
    s
}

#[derive(Debug, Error)]
pub enum JsonGraphError {
    #[error("invalid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("malformed graph document: {0}")]
    Shape(String),
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a str, JsonGraphError> {
    v.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| JsonGraphError::Shape(format!("missing string field {key:?}")))
}

fn array<'a>(v: &'a Value, key: &str) -> Result<&'a Vec<Value>, JsonGraphError> {
    v.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| JsonGraphError::Shape(format!("missing array field {key:?}")))
}

/// Read back a graph written by [`to_json`].
pub fn from_json(text: &str) -> Result<ExplanationGraph, JsonGraphError> {
    let doc: Value = serde_json::from_str(text)?;
    let mut by_id: BTreeMap<String, ENode> = BTreeMap::new();
    for n in array(&doc, "nodes")? {
        let kind = NodeKind::from_name(field(n, "kind")?)
            .ok_or_else(|| JsonGraphError::Shape(format!("unknown kind in {n}")))?;
        let label = field(n, "label")?;
        let node = ENode::parse(kind, label)
            .ok_or_else(|| JsonGraphError::Shape(format!("bad label {label:?}")))?;
        by_id.insert(field(n, "id")?.to_string(), node);
    }
    let lookup = |id: &str| {
        by_id
            .get(id)
            .cloned()
            .ok_or_else(|| JsonGraphError::Shape(format!("unknown node id {id}")))
    };
    let mut edges = BTreeSet::new();
    for e in array(&doc, "edges")? {
        let label = EdgeLabel::from_name(field(e, "label")?)
            .ok_or_else(|| JsonGraphError::Shape(format!("unknown edge label in {e}")))?;
        edges.insert(EEdge {
            from: lookup(field(e, "from")?)?,
            to: lookup(field(e, "to")?)?,
            label,
        });
    }
    Ok(ExplanationGraph {
        root: lookup(field(&doc, "root")?)?,
        nodes: by_id.into_values().collect(),
        edges,
    })
}

/// One `from -label-> to` line per edge.
pub fn to_text(g: &ExplanationGraph, glyphs: Glyphs) -> String {
    let mut out = format!("root: {}\n", g.root.label(glyphs));
    for e in &g.edges {
        writeln!(
            out,
            "{} -{}-> {}",
            e.from.label(glyphs),
            e.label.as_str(),
            e.to.label(glyphs)
        )
        .unwrap();
    }
    out
}
