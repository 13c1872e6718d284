//! Open paths and routes, their mutual reduction, and m-separation.
//!
//! A *walk* is an alternating node/edge sequence. A walk with distinct nodes is
//! a path; otherwise it is a route. Given a conditioning set `Z`, a path is open
//! when each collider is in `Z` or has a descendant in `Z` and each non-collider
//! is outside `Z`. A route is open when each collider occurrence is in `Z` and
//! each non-collider occurrence is outside `Z`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::diagram::{EdgeKind, Link, PathDiagram};
use crate::error::{Error, Result};

/// Default bound on `|Π_{X:Y}|` for [`enumerate_open_paths`].
pub const DEFAULT_PATH_CAP: usize = 10_000;

/// Canonical identity of an edge, independent of traversal direction.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct EdgeKey {
    pub kind: EdgeKind,
    pub a: usize,
    pub b: usize,
}

impl EdgeKey {
    pub fn of(u: usize, link: Link, v: usize) -> EdgeKey {
        match link {
            Link::Forward => EdgeKey { kind: EdgeKind::Directed, a: u, b: v },
            Link::Backward => EdgeKey { kind: EdgeKind::Directed, a: v, b: u },
            Link::Bidirected => EdgeKey { kind: EdgeKind::Bidirected, a: u.min(v), b: u.max(v) },
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct Walk {
    nodes: Vec<usize>,
    links: Vec<Link>,
}

impl Walk {
    pub fn single(node: usize) -> Walk {
        Walk { nodes: vec![node], links: Vec::new() }
    }

    pub fn new(nodes: Vec<usize>, links: Vec<Link>) -> Result<Walk> {
        if nodes.is_empty() || links.len() + 1 != nodes.len() {
            return Err(Error::InvalidWalk(format!(
                "{} nodes cannot be joined by {} links",
                nodes.len(),
                links.len()
            )));
        }
        Ok(Walk { nodes, links })
    }

    /// Builds a walk from node names and link glyphs, e.g.
    /// `Walk::parse(&d, "X -> Y <- Z")`.
    pub fn parse(d: &PathDiagram, text: &str) -> Result<Walk> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() % 2 == 0 {
            return Err(Error::InvalidWalk(text.to_string()));
        }
        let mut nodes = vec![d.index_of(tokens[0])?];
        let mut links = Vec::new();
        for pair in tokens[1..].chunks(2) {
            links.push(match pair[0] {
                "->" => Link::Forward,
                "<-" => Link::Backward,
                "<->" => Link::Bidirected,
                other => return Err(Error::InvalidWalk(format!("unknown link `{other}`"))),
            });
            nodes.push(d.index_of(pair[1])?);
        }
        let w = Walk { nodes, links };
        w.check(d)?;
        Ok(w)
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn start(&self) -> usize {
        self.nodes[0]
    }

    pub fn end(&self) -> usize {
        *self.nodes.last().unwrap()
    }

    pub fn push(&mut self, link: Link, node: usize) {
        self.links.push(link);
        self.nodes.push(node);
    }

    pub fn is_path(&self) -> bool {
        let mut seen: Vec<usize> = self.nodes.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    pub fn reversed(&self) -> Walk {
        Walk {
            nodes: self.nodes.iter().rev().copied().collect(),
            links: self.links.iter().rev().map(|l| l.reversed()).collect(),
        }
    }

    pub fn edges(&self) -> Vec<EdgeKey> {
        (0..self.links.len())
            .map(|i| EdgeKey::of(self.nodes[i], self.links[i], self.nodes[i + 1]))
            .collect()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.nodes.contains(&node)
    }

    /// Arrowhead at position `pos` from the edge towards the start.
    pub fn head_from_prev(&self, pos: usize) -> bool {
        pos > 0 && self.links[pos - 1].head_at_end()
    }

    /// Arrowhead at position `pos` from the edge towards the end.
    pub fn head_from_next(&self, pos: usize) -> bool {
        pos < self.links.len() && self.links[pos].head_at_start()
    }

    pub fn check(&self, d: &PathDiagram) -> Result<()> {
        let n = d.node_count();
        if let Some(&bad) = self.nodes.iter().find(|&&v| v >= n) {
            return Err(Error::InvalidWalk(format!("node index {bad} out of range")));
        }
        for i in 0..self.links.len() {
            let (u, v) = (self.nodes[i], self.nodes[i + 1]);
            let present = d.incident(u).iter().any(|inc| inc.other == v && inc.link == self.links[i]);
            if !present {
                return Err(Error::InvalidWalk(format!(
                    "no edge {} {} {}",
                    d.name(u),
                    self.links[i].glyph(),
                    d.name(v)
                )));
            }
        }
        Ok(())
    }

    pub fn display<'a>(&'a self, d: &'a PathDiagram) -> WalkDisplay<'a> {
        WalkDisplay { walk: self, diagram: d }
    }
}

pub struct WalkDisplay<'a> {
    walk: &'a Walk,
    diagram: &'a PathDiagram,
}

impl fmt::Display for WalkDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.diagram.name(self.walk.nodes[0]))?;
        for (l, &v) in self.walk.links.iter().zip(&self.walk.nodes[1..]) {
            write!(f, " {} {}", l.glyph(), self.diagram.name(v))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockReason {
    NonColliderInZ,
    ColliderNotActivated,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct Blocker {
    /// Position of the blocking occurrence within the walk.
    pub position: usize,
    pub node: usize,
    pub reason: BlockReason,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct OpennessVerdict {
    pub open: bool,
    pub blocker: Option<Blocker>,
}

impl OpennessVerdict {
    const OPEN: OpennessVerdict = OpennessVerdict { open: true, blocker: None };
}

pub fn mask(n: usize, set: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in set {
        m[v] = true;
    }
    m
}

/// Whether the occurrence at `pos` has arrowheads from both incident edges.
pub fn is_collider_at(walk: &Walk, pos: usize) -> Result<bool> {
    if pos == 0 || pos >= walk.len() {
        return Err(Error::MalformedQuery(format!(
            "position {pos} is not an interior occurrence of a walk with {} edges",
            walk.len()
        )));
    }
    Ok(walk.head_from_prev(pos) && walk.head_from_next(pos))
}

fn endpoint_check(walk: &Walk, zmask: &[bool]) -> Result<()> {
    if zmask[walk.start()] || zmask[walk.end()] {
        return Err(Error::MalformedQuery("walk endpoint lies in the conditioning set".into()));
    }
    Ok(())
}

fn junctions(walk: &Walk, cond: &[bool], active: &[bool]) -> OpennessVerdict {
    for pos in 1..walk.len() {
        let v = walk.nodes[pos];
        let collider = walk.head_from_prev(pos) && walk.head_from_next(pos);
        let reason = if collider {
            (!active[v]).then_some(BlockReason::ColliderNotActivated)
        } else {
            cond[v].then_some(BlockReason::NonColliderInZ)
        };
        if let Some(reason) = reason {
            return OpennessVerdict { open: false, blocker: Some(Blocker { position: pos, node: v, reason }) };
        }
    }
    OpennessVerdict::OPEN
}

pub fn path_is_open(d: &PathDiagram, path: &Walk, z: &[usize]) -> Result<OpennessVerdict> {
    path.check(d)?;
    if !path.is_path() {
        return Err(Error::InvalidWalk("nodes repeat; use route_is_open".into()));
    }
    let zmask = mask(d.node_count(), z);
    endpoint_check(path, &zmask)?;
    Ok(junctions(path, &zmask, &d.ancestors_mask(z)))
}

pub fn route_is_open(d: &PathDiagram, route: &Walk, z: &[usize]) -> Result<OpennessVerdict> {
    route.check(d)?;
    let zmask = mask(d.node_count(), z);
    endpoint_check(route, &zmask)?;
    Ok(junctions(route, &zmask, &zmask))
}

// Keeps each node's first occurrence and jumps to its last one, which
// splices out every stretch between repeats.
fn shortcut(walk: &Walk) -> Walk {
    let n = walk.nodes.iter().max().map_or(0, |&m| m + 1);
    let mut last = vec![0; n];
    for (i, &v) in walk.nodes.iter().enumerate() {
        last[v] = i;
    }
    let mut nodes = Vec::with_capacity(walk.nodes.len());
    let mut links = Vec::with_capacity(walk.links.len());
    let mut i = 0;
    loop {
        let v = walk.nodes[i];
        nodes.push(v);
        i = last[v];
        if i == walk.links.len() {
            return Walk { nodes, links };
        }
        links.push(walk.links[i]);
        i += 1;
    }
}

/// Reduces a `Z`-open route to a `Z`-open path whose edges are a subset of
/// the route's edges.
pub fn route_to_path(d: &PathDiagram, route: &Walk, z: &[usize]) -> Result<Walk> {
    if !route_is_open(d, route, z)?.open {
        return Err(Error::NotOpen);
    }
    Ok(shortcut(route))
}

/// Expands a `Z`-open path into a `Z`-open route: every collider `C ∉ Z` is
/// replaced by a round trip `C -> … -> W <- … <- C` down to some `W ∈ Z`.
pub fn path_to_route(d: &PathDiagram, path: &Walk, z: &[usize]) -> Result<Walk> {
    if !path_is_open(d, path, z)?.open {
        return Err(Error::NotOpen);
    }
    let zmask = mask(d.node_count(), z);
    let mut out = Walk::single(path.start());
    for pos in 1..=path.len() {
        let v = path.nodes[pos];
        out.push(path.links[pos - 1], v);
        if pos < path.len() && path.head_from_prev(pos) && path.head_from_next(pos) && !zmask[v] {
            let down = descent_to(d, v, &zmask).ok_or_else(|| {
                Error::InvalidWalk(format!("collider {} has no directed path into Z", d.name(v)))
            })?;
            for w in &down[1..] {
                out.push(Link::Forward, *w);
            }
            for w in down[..down.len() - 1].iter().rev() {
                out.push(Link::Backward, *w);
            }
        }
    }
    Ok(out)
}

// Shortest directed path from `from` to the first node in Z.
fn descent_to(d: &PathDiagram, from: usize, zmask: &[bool]) -> Option<Vec<usize>> {
    let n = d.node_count();
    let mut prev = vec![usize::MAX; n];
    let mut queue = VecDeque::from([from]);
    prev[from] = from;
    while let Some(v) = queue.pop_front() {
        for &c in d.children(v) {
            if prev[c] != usize::MAX {
                continue;
            }
            prev[c] = v;
            if zmask[c] {
                let mut chain = vec![c];
                let mut cur = c;
                while cur != from {
                    cur = prev[cur];
                    chain.push(cur);
                }
                chain.reverse();
                return Some(chain);
            }
            queue.push_back(c);
        }
    }
    None
}

/// Constraint on the last edge of a connecting walk, seen from its target.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Arrival {
    Any,
    /// Ends `… -> T` or `… <-> T`, i.e. enters through `Pa(T) ∪ Sp(T)`.
    Head,
    /// Ends `… <- T`, i.e. enters through `Ch(T)`.
    Tail,
}

impl Arrival {
    fn admits(self, link: Link) -> bool {
        match self {
            Arrival::Any => true,
            Arrival::Head => link.head_at_end(),
            Arrival::Tail => !link.head_at_end(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Semantics {
    /// Colliders need a descendant (or themselves) in the conditioning set.
    Path,
    /// Colliders must themselves be in the conditioning set.
    Route,
}

/// Breadth-first search over `(node, arrived with arrowhead)` states. Exact for
/// open-route existence and, under [`Semantics::Path`], for open-path existence.
#[derive(Clone, Debug)]
pub struct Reach<'a> {
    d: &'a PathDiagram,
    cond: Vec<bool>,
    /// Colliders that may be passed; empty under route semantics, where
    /// `cond` plays that role.
    active: Vec<bool>,
    blocked: Vec<bool>,
    first_tail: bool,
    arrival: Arrival,
    target_passable: bool,
}

impl<'a> Reach<'a> {
    pub fn new(d: &'a PathDiagram, cond: &[usize], semantics: Semantics) -> Reach<'a> {
        let n = d.node_count();
        let cmask = mask(n, cond);
        let active = match semantics {
            Semantics::Path => d.ancestors_mask(cond),
            Semantics::Route => Vec::new(),
        };
        Reach {
            d,
            cond: cmask,
            active,
            blocked: Vec::new(),
            first_tail: false,
            arrival: Arrival::Any,
            target_passable: semantics == Semantics::Route,
        }
    }

    /// Nodes the walk may not visit (other than as its target).
    pub fn avoiding(mut self, nodes: impl IntoIterator<Item = usize>) -> Self {
        self.blocked.resize(self.d.node_count(), false);
        for v in nodes {
            self.blocked[v] = true;
        }
        self
    }

    /// Require the first edge to leave the source as `source -> …`.
    pub fn leaving_by_tail(mut self) -> Self {
        self.first_tail = true;
        self
    }

    /// Whether the walk may pass through its target before ending there.
    pub fn passing_target(mut self, yes: bool) -> Self {
        self.target_passable = yes;
        self
    }

    pub fn arriving(mut self, arrival: Arrival) -> Self {
        self.arrival = arrival;
        self
    }

    pub fn find(&self, source: usize, target: usize) -> Option<Walk> {
        let n = self.d.node_count();
        const START: usize = usize::MAX;
        // prev[state] = (previous state, link into this state's node)
        let mut prev: Vec<Option<(usize, Link)>> = vec![None; 2 * n];
        let mut queue = VecDeque::new();
        let state = |v: usize, head: bool| 2 * v + head as usize;

        let rebuild = |prev: &[Option<(usize, Link)>], mut s: usize, last: Link| -> Walk {
            let mut nodes = vec![target];
            let mut links = vec![last];
            while s != START {
                nodes.push(s / 2);
                let (p, l) = prev[s].unwrap();
                if p != START {
                    links.push(l);
                } else {
                    links.push(l);
                    nodes.push(source);
                }
                s = p;
            }
            // `links` holds one extra entry when the walk has an intermediate node.
            nodes.reverse();
            links.reverse();
            if links.len() == nodes.len() {
                links.remove(0);
            }
            Walk { nodes, links }
        };

        for inc in self.d.incident(source) {
            if self.first_tail && inc.link != Link::Forward {
                continue;
            }
            let w = inc.other;
            if w == target && self.arrival.admits(inc.link) {
                return Some(Walk { nodes: vec![source, target], links: vec![inc.link] });
            }
            if (self.blocked.get(w) == Some(&true) && w != target) || (w == target && !self.target_passable) {
                continue;
            }
            let s = state(w, inc.link.head_at_end());
            if prev[s].is_none() {
                prev[s] = Some((START, inc.link));
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            let (v, head_in) = (s / 2, s % 2 == 1);
            for inc in self.d.incident(v) {
                let collider = head_in && inc.link.head_at_start();
                let ok = if collider { self.active.get(v).copied().unwrap_or(self.cond[v]) } else { !self.cond[v] };
                if !ok {
                    continue;
                }
                let w = inc.other;
                if w == target && self.arrival.admits(inc.link) {
                    return Some(rebuild(&prev, s, inc.link));
                }
                if (self.blocked.get(w) == Some(&true) && w != target) || (w == target && !self.target_passable) {
                    continue;
                }
                let t = state(w, inc.link.head_at_end());
                if prev[t].is_none() {
                    prev[t] = Some((s, inc.link));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    pub fn connected(&self, source: usize, target: usize) -> bool {
        self.find(source, target).is_some()
    }

    /// Like [`Reach::find`] but reduces the witness walk to a path.
    pub fn find_path(&self, source: usize, target: usize) -> Option<Walk> {
        self.find(source, target).map(|w| shortcut(&w))
    }
}

fn query_check(d: &PathDiagram, x: usize, y: usize, z: &[usize]) -> Result<()> {
    d.ensure_valid()?;
    let n = d.node_count();
    if x >= n || y >= n || z.iter().any(|&v| v >= n) {
        return Err(Error::MalformedQuery("node index out of range".into()));
    }
    if x == y {
        return Err(Error::MalformedQuery("endpoints must differ".into()));
    }
    if z.contains(&x) || z.contains(&y) {
        return Err(Error::MalformedQuery("endpoint lies in the conditioning set".into()));
    }
    Ok(())
}

/// `X ⟂ Y | Z`: no `Z`-open path joins `x` and `y`.
pub fn m_separated(d: &PathDiagram, x: usize, y: usize, z: &[usize]) -> Result<bool> {
    query_check(d, x, y, z)?;
    Ok(!Reach::new(d, z, Semantics::Path).connected(x, y))
}

/// Exact existence of a `Z`-open route from `x` to `y`.
pub fn open_route_exists(d: &PathDiagram, x: usize, y: usize, z: &[usize]) -> Result<bool> {
    query_check(d, x, y, z)?;
    Ok(Reach::new(d, z, Semantics::Route).connected(x, y))
}

pub fn find_open_route(d: &PathDiagram, x: usize, y: usize, z: &[usize]) -> Result<Option<Walk>> {
    query_check(d, x, y, z)?;
    Ok(Reach::new(d, z, Semantics::Route).find(x, y))
}

/// All `Z`-open paths from `x` to `y`, sorted by node sequence.
pub fn enumerate_open_paths(
    d: &PathDiagram,
    x: usize,
    y: usize,
    z: &[usize],
    cap: usize,
) -> Result<Vec<Walk>> {
    query_check(d, x, y, z)?;
    let n = d.node_count();
    let cond = mask(n, z);
    let active = d.ancestors_mask(z);
    let mut on_path = vec![false; n];
    let mut out = Vec::new();
    let mut walk = Walk::single(x);
    on_path[x] = true;
    fn dfs(
        d: &PathDiagram,
        y: usize,
        cond: &[bool],
        active: &[bool],
        on_path: &mut [bool],
        walk: &mut Walk,
        out: &mut Vec<Walk>,
        cap: usize,
    ) -> Result<()> {
        let v = walk.end();
        let head_in = walk.head_from_prev(walk.len());
        for inc in d.incident(v) {
            let w = inc.other;
            if on_path[w] {
                continue;
            }
            if !walk.is_empty() {
                let collider = head_in && inc.link.head_at_start();
                let ok = if collider { active[v] } else { !cond[v] };
                if !ok {
                    continue;
                }
            }
            walk.push(inc.link, w);
            if w == y {
                if out.len() == cap {
                    return Err(Error::EnumerationCap(cap));
                }
                out.push(walk.clone());
            } else {
                on_path[w] = true;
                dfs(d, y, cond, active, on_path, walk, out, cap)?;
                on_path[w] = false;
            }
            walk.nodes.pop();
            walk.links.pop();
        }
        Ok(())
    }
    dfs(d, y, &cond, &active, &mut on_path, &mut walk, &mut out, cap)?;
    out.sort();
    Ok(out)
}

/// Every path between `x` and `y`, open or not. Exponential; meant for small
/// diagrams and cross-checks.
pub fn all_paths(d: &PathDiagram, x: usize, y: usize) -> Vec<Walk> {
    let mut out = Vec::new();
    let mut stack = vec![Walk::single(x)];
    while let Some(w) = stack.pop() {
        for inc in d.incident(w.end()) {
            if w.contains(inc.other) {
                continue;
            }
            let mut next = w.clone();
            next.push(inc.link, inc.other);
            if inc.other == y {
                out.push(next);
            } else {
                stack.push(next);
            }
        }
    }
    out.sort();
    out
}

/// `Z`-open routes from `x` to `y` with at most `max_len` edges, traversing
/// each edge at most twice per direction.
pub fn enumerate_open_routes(
    d: &PathDiagram,
    x: usize,
    y: usize,
    z: &[usize],
    max_len: usize,
) -> Result<Vec<Walk>> {
    query_check(d, x, y, z)?;
    let cond = mask(d.node_count(), z);
    let mut uses: BTreeMap<(usize, usize, Link), u8> = BTreeMap::new();
    let mut out = Vec::new();
    let mut walk = Walk::single(x);
    fn dfs(
        d: &PathDiagram,
        y: usize,
        cond: &[bool],
        max_len: usize,
        uses: &mut BTreeMap<(usize, usize, Link), u8>,
        walk: &mut Walk,
        out: &mut Vec<Walk>,
    ) {
        if walk.len() == max_len {
            return;
        }
        let v = walk.end();
        let head_in = walk.head_from_prev(walk.len());
        for inc in d.incident(v) {
            if !walk.is_empty() {
                let collider = head_in && inc.link.head_at_start();
                if collider != cond[v] {
                    continue;
                }
            }
            let key = (v, inc.other, inc.link);
            let count = uses.entry(key).or_insert(0);
            if *count == 2 {
                continue;
            }
            *count += 1;
            walk.push(inc.link, inc.other);
            if inc.other == y {
                out.push(walk.clone());
            }
            dfs(d, y, cond, max_len, uses, walk, out);
            walk.nodes.pop();
            walk.links.pop();
            *uses.get_mut(&key).unwrap() -= 1;
        }
    }
    dfs(d, y, &cond, max_len, &mut uses, &mut walk, &mut out);
    out.sort();
    out.dedup();
    Ok(out)
}
