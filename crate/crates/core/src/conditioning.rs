//! The node-splitting conditioning transform.
//!
//! Conditioning on `S` replaces every edge `A -> B` with `A ∈ S` by
//! `A__B -> B`, where `A__B` is a fresh exogenous node carrying the same
//! coefficient. Partial covariances given `S` in the original diagram equal
//! partial covariances given `S ∪ S′` in the result.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::diagram::{Edge, EdgeKind, NodeId, PathDiagram};
use crate::error::{Error, Result};
use crate::gaussian::{self, approx_eq, REL_TOL};

pub const DEFAULT_SPLIT_VARIANCE: f64 = 1.0;
const MAX_SUFFIX: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionedDiagram {
    pub diagram: PathDiagram,
    pub base: PathDiagram,
    /// `(A, B) -> A__B`
    pub split_map: BTreeMap<(NodeId, NodeId), NodeId>,
    pub s_nodes: BTreeSet<NodeId>,
    pub s_prime: BTreeSet<NodeId>,
}

impl ConditionedDiagram {
    /// `S ∪ S′` as indices into the conditioned diagram.
    pub fn z(&self) -> Vec<usize> {
        self.s_nodes
            .iter()
            .chain(&self.s_prime)
            .map(|n| self.diagram.index_of(n.as_str()).expect("conditioned diagram holds S and S′"))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// The split node standing in for `tail -> head`, if any.
    pub fn split_of(&self, tail: &str, head: &str) -> Option<&NodeId> {
        self.split_map
            .iter()
            .find(|((a, b), _)| a.as_str() == tail && b.as_str() == head)
            .map(|(_, v)| v)
    }
}

pub fn condition<S: AsRef<str>>(d: &PathDiagram, s: &[S]) -> Result<ConditionedDiagram> {
    condition_with_variance(d, s, DEFAULT_SPLIT_VARIANCE)
}

/// [`condition`] with a chosen error variance for the new nodes.
pub fn condition_with_variance<S: AsRef<str>>(
    d: &PathDiagram,
    s: &[S],
    split_variance: f64,
) -> Result<ConditionedDiagram> {
    let mut s_nodes = BTreeSet::new();
    for name in s {
        let ix = d.index_of(name.as_ref())?;
        s_nodes.insert(d.name(ix).clone());
    }
    let mut taken: BTreeSet<String> = d.names().iter().map(|n| n.as_str().to_string()).collect();
    let mut split_map = BTreeMap::new();
    let mut s_prime = BTreeSet::new();
    let mut variances = d.variance_map();
    let mut edges = Vec::with_capacity(d.edges().len());
    for e in d.edges() {
        if e.kind == EdgeKind::Directed && s_nodes.contains(&e.tail) {
            let fresh = fresh_name(&taken, &e.tail, &e.head)?;
            taken.insert(fresh.as_str().to_string());
            variances.insert(fresh.clone(), split_variance);
            edges.push(Edge::directed(fresh.clone(), e.head.clone(), e.weight));
            split_map.insert((e.tail.clone(), e.head.clone()), fresh.clone());
            s_prime.insert(fresh);
        } else {
            edges.push(e.clone());
        }
    }
    let nodes = d.names().iter().cloned().chain(s_prime.iter().cloned());
    let diagram = PathDiagram::from_parts(nodes, edges, &variances);
    Ok(ConditionedDiagram { diagram, base: d.clone(), split_map, s_nodes, s_prime })
}

fn fresh_name(taken: &BTreeSet<String>, tail: &NodeId, head: &NodeId) -> Result<NodeId> {
    let stem = format!("{tail}__{head}");
    let candidates = std::iter::once(stem.clone()).chain((1..=MAX_SUFFIX).map(|k| format!("{stem}_{k}")));
    for c in candidates {
        if !taken.contains(&c) {
            return NodeId::new(c);
        }
    }
    Err(Error::NameCollision { tail: tail.to_string(), head: head.to_string() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// `σ_{XY·S}` in the original diagram.
    pub original: f64,
    /// `σ_{XY·S∪S′}` in the conditioned diagram.
    pub conditioned: f64,
    pub agree: bool,
}

pub fn equivalence_check(cd: &ConditionedDiagram, x: &str, y: &str) -> Result<EquivalenceReport> {
    let base = &cd.base;
    let s: Vec<&str> = cd.s_nodes.iter().map(NodeId::as_str).collect();
    let lhs = gaussian::implied_covariance(base)?.partial_covariance(
        base.index_of(x)?,
        base.index_of(y)?,
        &base.indices_of(&s)?,
    )?;
    let d = &cd.diagram;
    let rhs = gaussian::implied_covariance(d)?.partial_covariance(d.index_of(x)?, d.index_of(y)?, &cd.z())?;
    Ok(EquivalenceReport { original: lhs, conditioned: rhs, agree: approx_eq(lhs, rhs, REL_TOL) })
}
