//! The line-oriented diagram file format.
//!
//! ```text
//! # comment
//! var X = 2.0
//! X -> Y = 0.5
//! Y <-> Z = 0.1
//! ```
//!
//! Nodes are declared by first mention. Error variances default to 1.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::conditioning::ConditionedDiagram;
use crate::diagram::{Edge, EdgeKind, NodeId, PathDiagram, DEFAULT_ERROR_VARIANCE};
use crate::error::{Error, Result};

/// Parses a diagram file. Structural problems such as cycles are left for
/// [`PathDiagram::validate`]; only syntax errors are reported here.
pub fn parse_diagram(text: &str) -> Result<PathDiagram> {
    let mut nodes: Vec<NodeId> = Vec::new();
    let mut seen = BTreeMap::new();
    let mut variances = BTreeMap::new();
    let mut edges = Vec::new();
    let mut mention = |id: &NodeId, nodes: &mut Vec<NodeId>| {
        if seen.insert(id.clone(), ()).is_none() {
            nodes.push(id.clone());
        }
    };
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| Error::Parse { line: line_no, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (lhs, rhs) = line.split_once('=').ok_or_else(|| err(format!("expected `= <real>` in `{line}`")))?;
        let value = parse_real(rhs.trim()).map_err(err)?;
        let words: Vec<&str> = lhs.split_whitespace().collect();
        match words.as_slice() {
            ["var", name] => {
                let id = ident(name).map_err(err)?;
                if variances.insert(id.clone(), value).is_some() {
                    return Err(err(format!("variance of `{id}` given twice")));
                }
                mention(&id, &mut nodes);
            }
            [a, arrow @ ("->" | "<->"), b] => {
                let (a, b) = (ident(a).map_err(err)?, ident(b).map_err(err)?);
                mention(&a, &mut nodes);
                mention(&b, &mut nodes);
                edges.push(if *arrow == "->" { Edge::directed(a, b, value) } else { Edge::bidirected(a, b, value) });
            }
            _ => return Err(err(format!("unrecognised line `{line}`"))),
        }
    }
    Ok(PathDiagram::from_parts(nodes, edges, &variances))
}

fn ident(word: &str) -> std::result::Result<NodeId, String> {
    if word == "var" {
        return Err("`var` is reserved".into());
    }
    NodeId::new(word).map_err(|e| e.to_string())
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// Writes `d` so that [`parse_diagram`] reads back an identical diagram.
/// Default variances are written too, which keeps isolated nodes declared.
pub fn format_diagram(d: &PathDiagram) -> String {
    let mut out = String::new();
    write_body(&mut out, d);
    out
}

/// Like [`format_diagram`], with a comment recording what each split node
/// stands in for.
pub fn format_conditioned(cd: &ConditionedDiagram) -> String {
    let mut out = String::new();
    let s: Vec<&str> = cd.s_nodes.iter().map(NodeId::as_str).collect();
    let _ = writeln!(out, "# conditioned on {{{}}}", s.join(", "));
    for ((tail, head), split) in &cd.split_map {
        let _ = writeln!(out, "# {split} replaces {tail} -> {head}");
    }
    write_body(&mut out, &cd.diagram);
    out
}

fn write_body(out: &mut String, d: &PathDiagram) {
    for (i, name) in d.names().iter().enumerate() {
        let v = d.error_variance(i);
        let _ = writeln!(out, "var {name} = {}", if v == DEFAULT_ERROR_VARIANCE { "1".to_string() } else { v.to_string() });
    }
    for e in d.edges() {
        let arrow = match e.kind {
            EdgeKind::Directed => "->",
            EdgeKind::Bidirected => "<->",
        };
        let _ = writeln!(out, "{} {arrow} {} = {}", e.tail, e.head, e.weight);
    }
}
