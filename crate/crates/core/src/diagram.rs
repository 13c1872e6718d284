//! Parameterized path diagrams: linear structural equation models drawn as
//! acyclic directed mixed graphs.
//!
//! Directed edges `A -> B` carry path coefficients, bidirected edges `A <-> B`
//! carry error covariances, and every node carries an error variance. Nodes are
//! indexed in lexicographic order of their names; every matrix and every
//! deterministic iteration in the crate uses that order.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Error variance assigned to nodes that never declare one.
pub const DEFAULT_ERROR_VARIANCE: f64 = 1.0;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NodeId(String);

impl NodeId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::InvalidIdentifier(name));
        }
        Ok(NodeId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for NodeId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl FromStr for NodeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        NodeId::new(s)
    }
}

impl TryFrom<String> for NodeId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        NodeId::new(s)
    }
}

impl From<NodeId> for String {
    fn from(n: NodeId) -> String {
        n.0
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Directed,
    Bidirected,
}

/// A single edge. Bidirected edges are stored with `tail < head`.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Edge {
    pub kind: EdgeKind,
    pub tail: NodeId,
    pub head: NodeId,
    pub weight: f64,
}

impl Edge {
    pub fn directed(tail: NodeId, head: NodeId, weight: f64) -> Self {
        Edge { kind: EdgeKind::Directed, tail, head, weight }
    }

    pub fn bidirected(a: NodeId, b: NodeId, weight: f64) -> Self {
        let (tail, head) = if a <= b { (a, b) } else { (b, a) };
        Edge { kind: EdgeKind::Bidirected, tail, head, weight }
    }

    fn sort_key(&self) -> (&NodeId, &NodeId, EdgeKind) {
        (&self.tail, &self.head, self.kind)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            EdgeKind::Directed => write!(f, "{} -> {}", self.tail, self.head),
            EdgeKind::Bidirected => write!(f, "{} <-> {}", self.tail, self.head),
        }
    }
}

/// How an edge is traversed when a walk moves from one endpoint to the other.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    /// `u -> v`
    Forward,
    /// `u <- v`
    Backward,
    /// `u <-> v`
    Bidirected,
}

impl Link {
    /// Arrowhead at the node the traversal arrives at.
    pub fn head_at_end(self) -> bool {
        matches!(self, Link::Forward | Link::Bidirected)
    }

    /// Arrowhead at the node the traversal leaves from.
    pub fn head_at_start(self) -> bool {
        matches!(self, Link::Backward | Link::Bidirected)
    }

    pub fn reversed(self) -> Link {
        match self {
            Link::Forward => Link::Backward,
            Link::Backward => Link::Forward,
            Link::Bidirected => Link::Bidirected,
        }
    }

    pub fn kind(self) -> EdgeKind {
        match self {
            Link::Bidirected => EdgeKind::Bidirected,
            _ => EdgeKind::Directed,
        }
    }

    pub fn glyph(self) -> &'static str {
        match self {
            Link::Forward => "->",
            Link::Backward => "<-",
            Link::Bidirected => "<->",
        }
    }
}

/// An edge seen from one of its endpoints.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Incidence {
    pub other: usize,
    pub link: Link,
    pub weight: f64,
}

#[derive(Clone, PartialEq, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DirectedCycle { nodes: Vec<NodeId> },
    NotPositiveDefinite { min_pivot: f64 },
    DanglingEndpoint { edge: String, node: NodeId },
    DuplicateEdge { edge: String },
    SelfLoop { node: NodeId },
    NonPositiveVariance { node: NodeId, value: f64 },
    NonFiniteWeight { edge: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DirectedCycle { nodes } => {
                let names: Vec<_> = nodes.iter().map(NodeId::as_str).collect();
                write!(f, "directed cycle through {{{}}}", names.join(", "))
            }
            Violation::NotPositiveDefinite { min_pivot } => {
                write!(f, "error covariance not positive definite (pivot {min_pivot:.3e})")
            }
            Violation::DanglingEndpoint { edge, node } => {
                write!(f, "edge {edge} references undeclared node {node}")
            }
            Violation::DuplicateEdge { edge } => write!(f, "duplicate edge {edge}"),
            Violation::SelfLoop { node } => write!(f, "self loop at {node}"),
            Violation::NonPositiveVariance { node, value } => {
                write!(f, "error variance of {node} is {value}, must be positive")
            }
            Violation::NonFiniteWeight { edge } => write!(f, "edge {edge} has a non-finite weight"),
        }
    }
}

#[derive(Clone, PartialEq, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A linear SEM over an acyclic directed mixed graph.
///
/// Construction never fails on structural problems; they are recorded and
/// reported by [`PathDiagram::validate`]. Algorithms that need a well-formed
/// diagram call [`PathDiagram::ensure_valid`].
#[derive(Clone, Debug)]
pub struct PathDiagram {
    names: Vec<NodeId>,
    index: BTreeMap<NodeId, usize>,
    edges: Vec<Edge>,
    variance: Vec<f64>,
    incident: Vec<Vec<Incidence>>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    spouses: Vec<Vec<usize>>,
    directed: BTreeMap<(usize, usize), f64>,
    bidirected: BTreeMap<(usize, usize), f64>,
    topo: Option<Vec<usize>>,
    violations: Vec<Violation>,
}

impl PartialEq for PathDiagram {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.edges == other.edges && self.variance == other.variance
    }
}

impl PathDiagram {
    pub fn builder() -> DiagramBuilder {
        DiagramBuilder::default()
    }

    /// Assembles a diagram from explicit parts. Nodes without an entry in
    /// `variances` get [`DEFAULT_ERROR_VARIANCE`]; variances for undeclared
    /// nodes are ignored.
    pub fn from_parts(
        nodes: impl IntoIterator<Item = NodeId>,
        edges: Vec<Edge>,
        variances: &BTreeMap<NodeId, f64>,
    ) -> PathDiagram {
        let names: Vec<NodeId> = nodes.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let index: BTreeMap<NodeId, usize> =
            names.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        let n = names.len();
        let variance: Vec<f64> = names
            .iter()
            .map(|name| variances.get(name).copied().unwrap_or(DEFAULT_ERROR_VARIANCE))
            .collect();

        let mut violations = Vec::new();
        let mut directed = BTreeMap::new();
        let mut bidirected = BTreeMap::new();
        let mut kept = Vec::new();
        for edge in edges {
            let edge = match edge.kind {
                EdgeKind::Bidirected => Edge::bidirected(edge.tail, edge.head, edge.weight),
                EdgeKind::Directed => edge,
            };
            let (Some(&a), Some(&b)) = (index.get(&edge.tail), index.get(&edge.head)) else {
                let node = if index.contains_key(&edge.tail) { &edge.head } else { &edge.tail };
                violations.push(Violation::DanglingEndpoint {
                    edge: edge.to_string(),
                    node: node.clone(),
                });
                continue;
            };
            if a == b {
                violations.push(Violation::SelfLoop { node: edge.tail.clone() });
                continue;
            }
            if !edge.weight.is_finite() {
                violations.push(Violation::NonFiniteWeight { edge: edge.to_string() });
                continue;
            }
            let slot = match edge.kind {
                EdgeKind::Directed => &mut directed,
                EdgeKind::Bidirected => &mut bidirected,
            };
            if slot.contains_key(&(a, b)) {
                violations.push(Violation::DuplicateEdge { edge: edge.to_string() });
                continue;
            }
            slot.insert((a, b), edge.weight);
            kept.push(edge);
        }
        kept.sort_by(|x, y| x.sort_key().cmp(&y.sort_key()));

        let mut incident = vec![Vec::new(); n];
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let mut spouses = vec![Vec::new(); n];
        for (&(a, b), &w) in &directed {
            incident[a].push(Incidence { other: b, link: Link::Forward, weight: w });
            incident[b].push(Incidence { other: a, link: Link::Backward, weight: w });
            children[a].push(b);
            parents[b].push(a);
        }
        for (&(a, b), &w) in &bidirected {
            incident[a].push(Incidence { other: b, link: Link::Bidirected, weight: w });
            incident[b].push(Incidence { other: a, link: Link::Bidirected, weight: w });
            spouses[a].push(b);
            spouses[b].push(a);
        }
        for list in incident.iter_mut() {
            list.sort_by_key(|x| (x.other, x.link));
        }
        for list in parents.iter_mut().chain(children.iter_mut()).chain(spouses.iter_mut()) {
            list.sort_unstable();
        }

        for (i, &v) in variance.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                violations.push(Violation::NonPositiveVariance { node: names[i].clone(), value: v });
            }
        }

        let mut diagram = PathDiagram {
            names,
            index,
            edges: kept,
            variance,
            incident,
            parents,
            children,
            spouses,
            directed,
            bidirected,
            topo: None,
            violations: Vec::new(),
        };
        match diagram.kahn() {
            Ok(order) => diagram.topo = Some(order),
            Err(stuck) => violations.push(Violation::DirectedCycle {
                nodes: stuck.into_iter().map(|i| diagram.names[i].clone()).collect(),
            }),
        }
        if violations.iter().all(|v| !matches!(v, Violation::NonPositiveVariance { .. })) {
            if let Err(min_pivot) = linalg::cholesky(&diagram.error_covariance_matrix()) {
                violations.push(Violation::NotPositiveDefinite { min_pivot });
            }
        }
        diagram.violations = violations;
        diagram
    }

    // Lexicographically smallest topological order, or the nodes left on cycles.
    fn kahn(&self) -> std::result::Result<Vec<usize>, Vec<usize>> {
        let n = self.names.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err((0..n).filter(|&i| indeg[i] > 0).collect())
        }
    }

    pub fn validate(&self) -> ValidationReport {
        ValidationReport { violations: self.violations.clone() }
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn ensure_valid(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidDiagram(self.violations.clone()))
        }
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[NodeId] {
        &self.names
    }

    pub fn name(&self, ix: usize) -> &NodeId {
        &self.names[ix]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn indices_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.index_of(n.as_ref())).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Canonically ordered edge list.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn error_variance(&self, ix: usize) -> f64 {
        self.variance[ix]
    }

    pub fn coefficient(&self, tail: usize, head: usize) -> Option<f64> {
        self.directed.get(&(tail, head)).copied()
    }

    pub fn error_covariance(&self, a: usize, b: usize) -> Option<f64> {
        self.bidirected.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn incident(&self, ix: usize) -> &[Incidence] {
        &self.incident[ix]
    }

    pub fn parents(&self, ix: usize) -> &[usize] {
        &self.parents[ix]
    }

    pub fn children(&self, ix: usize) -> &[usize] {
        &self.children[ix]
    }

    pub fn spouses(&self, ix: usize) -> &[usize] {
        &self.spouses[ix]
    }

    pub fn parents_of(&self, name: &str) -> Result<BTreeSet<NodeId>> {
        Ok(self.names_of(self.parents(self.index_of(name)?)))
    }

    pub fn children_of(&self, name: &str) -> Result<BTreeSet<NodeId>> {
        Ok(self.names_of(self.children(self.index_of(name)?)))
    }

    pub fn spouses_of(&self, name: &str) -> Result<BTreeSet<NodeId>> {
        Ok(self.names_of(self.spouses(self.index_of(name)?)))
    }

    pub fn names_of<'a>(&self, ixs: impl IntoIterator<Item = &'a usize>) -> BTreeSet<NodeId> {
        ixs.into_iter().map(|&i| self.names[i].clone()).collect()
    }

    pub fn directed_edge_count(&self) -> usize {
        self.directed.len()
    }

    pub fn bidirected_edge_count(&self) -> usize {
        self.bidirected.len()
    }

    /// `None` when the directed part has a cycle.
    pub fn topological_order(&self) -> Option<&[usize]> {
        self.topo.as_deref()
    }

    /// `Λ[i][j]` is the coefficient of `i -> j`.
    pub fn coefficient_matrix(&self) -> DMatrix<f64> {
        let n = self.names.len();
        let mut m = DMatrix::zeros(n, n);
        for (&(a, b), &w) in &self.directed {
            m[(a, b)] = w;
        }
        m
    }

    /// `Ω`: error variances on the diagonal, bidirected weights off it.
    pub fn error_covariance_matrix(&self) -> DMatrix<f64> {
        let n = self.names.len();
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.variance.clone()));
        for (&(a, b), &w) in &self.bidirected {
            m[(a, b)] = w;
            m[(b, a)] = w;
        }
        if n == 0 {
            return DMatrix::zeros(0, 0);
        }
        m
    }

    /// Mask of the nodes reachable from `seeds` along directed edges, seeds included.
    pub fn descendants_mask(&self, seeds: &[usize]) -> Vec<bool> {
        self.closure(seeds, &self.children)
    }

    /// Mask of the nodes with a directed path into `seeds`, seeds included.
    pub fn ancestors_mask(&self, seeds: &[usize]) -> Vec<bool> {
        self.closure(seeds, &self.parents)
    }

    fn closure(&self, seeds: &[usize], next: &[Vec<usize>]) -> Vec<bool> {
        let mut seen = vec![false; self.names.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &w in &next[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// True iff the undirected skeleton (with parallel edges counted
    /// separately) is a forest.
    pub fn is_singly_connected(&self) -> bool {
        let n = self.names.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b) in self.directed.keys().chain(self.bidirected.keys()) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        true
    }

    /// Same structure, new error variance for one node.
    pub fn with_error_variance(&self, ix: usize, value: f64) -> PathDiagram {
        let mut variances = self.variance_map();
        variances.insert(self.names[ix].clone(), value);
        PathDiagram::from_parts(self.names.iter().cloned(), self.edges.clone(), &variances)
    }

    pub fn variance_map(&self) -> BTreeMap<NodeId, f64> {
        self.names.iter().cloned().zip(self.variance.iter().copied()).collect()
    }
}

/// Incremental construction; nodes are declared implicitly on first mention.
#[derive(Clone, Debug, Default)]
pub struct DiagramBuilder {
    nodes: BTreeSet<NodeId>,
    variances: BTreeMap<NodeId, f64>,
    edges: Vec<Edge>,
    error: Option<Error>,
}

impl DiagramBuilder {
    fn id(&mut self, name: &str) -> Option<NodeId> {
        match NodeId::new(name) {
            Ok(id) => {
                self.nodes.insert(id.clone());
                Some(id)
            }
            Err(e) => {
                self.error.get_or_insert(e);
                None
            }
        }
    }

    pub fn node(mut self, name: &str) -> Self {
        self.id(name);
        self
    }

    pub fn variance(mut self, name: &str, value: f64) -> Self {
        if let Some(id) = self.id(name) {
            self.variances.insert(id, value);
        }
        self
    }

    pub fn directed(mut self, tail: &str, head: &str, weight: f64) -> Self {
        if let (Some(a), Some(b)) = (self.id(tail), self.id(head)) {
            self.edges.push(Edge::directed(a, b, weight));
        }
        self
    }

    pub fn bidirected(mut self, a: &str, b: &str, weight: f64) -> Self {
        if let (Some(a), Some(b)) = (self.id(a), self.id(b)) {
            self.edges.push(Edge::bidirected(a, b, weight));
        }
        self
    }

    /// Fails only on malformed identifiers; structural problems are left
    /// to [`PathDiagram::validate`].
    pub fn build(self) -> Result<PathDiagram> {
        if let Some(e) = self.error {
            return Err(e);
        }
        Ok(PathDiagram::from_parts(self.nodes, self.edges, &self.variances))
    }
}
