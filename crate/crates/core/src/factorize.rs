//! Factorization of `σ_{XY·Z}` into `σ_XY` times partial-variance ratios
//! along a subpath shared by every open path.
//!
//! The pipeline conditions the diagram on `S`, enumerates the `Z`-open paths
//! `Π` with `Z = S ∪ S′`, locates the shared subpath (the *spine*), rules out
//! reentrant routes, distributes `Z` over the spine nodes and finally
//! evaluates the ratio terms on the conditioned covariance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::conditioning::{self, ConditionedDiagram};
use crate::diagram::{Link, NodeId, PathDiagram};
use crate::error::{Error, Result};
use crate::gaussian::{self, approx_eq, CovarianceMatrix, REL_TOL};
use crate::separation::{self, m_separated, Arrival, Reach, Semantics, Walk, DEFAULT_PATH_CAP};

/// Orientation of a node within a collider-free path from `X` to `Y`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    /// Tails on both sides (or an endpoint with a tail).
    Root,
    /// Arrowhead from the edge on the `X` side.
    FromX,
    /// Arrowhead from the edge on the `Y` side.
    FromY,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Root,
    Nonroot,
}

/// How the first spine node of a non-root spine is entered.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Attachment {
    /// `X_1 <-> X_{m+1}` inside the spine.
    Bidirected,
    /// An arrowhead from a neighbour outside the spine, possibly a different
    /// neighbour in each path.
    Arrowhead,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TheoremUsed {
    Root,
    Nonroot,
    Chained,
}

impl Serialize for TheoremUsed {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl TheoremUsed {
    pub fn label(self) -> &'static str {
        match self {
            TheoremUsed::Root => "root",
            TheoremUsed::Nonroot => "nonroot",
            TheoremUsed::Chained => "chained",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    /// One maximal shared subpath.
    Single,
    /// Every shared subpath with at least one edge, treated as one spine.
    Chain,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spine {
    pub nodes: Vec<NodeId>,
    #[serde(skip)]
    pub indices: Vec<usize>,
    pub roles: Vec<Role>,
    /// Root plus left-arm nodes.
    pub m: usize,
    /// Right-arm nodes.
    pub n: usize,
    pub variant: Variant,
    pub attachment: Option<Attachment>,
    /// Shared subpaths making up the spine, in path order.
    pub segments: Vec<Vec<NodeId>>,
    /// Other shared subpaths as long as the chosen one (single mode only).
    pub ties: Vec<Vec<NodeId>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Failure {
    ColliderOnOpenPath { path: String, node: NodeId },
    NoCommonSpine,
    MixedRootRole { node: NodeId },
    ReentrantRoute { index: usize, node: NodeId, route: String },
    UnpartitionableLeftover { nodes: Vec<NodeId> },
}

impl Failure {
    pub fn kind(&self) -> &'static str {
        match self {
            Failure::ColliderOnOpenPath { .. } => "collider-on-open-path",
            Failure::NoCommonSpine => "no-common-spine",
            Failure::MixedRootRole { .. } => "mixed-root-role",
            Failure::ReentrantRoute { .. } => "reentrant-route",
            Failure::UnpartitionableLeftover { .. } => "unpartitionable-leftover",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::ColliderOnOpenPath { path, node } => {
                write!(f, "collider-on-open-path: {node} on {path}")
            }
            Failure::NoCommonSpine => write!(f, "no-common-spine"),
            Failure::MixedRootRole { node } => write!(f, "mixed-root-role: {node}"),
            Failure::ReentrantRoute { index, node, route } => {
                write!(f, "reentrant-route({index}): {node} via {route}")
            }
            Failure::UnpartitionableLeftover { nodes } => {
                let names: Vec<&str> = nodes.iter().map(NodeId::as_str).collect();
                write!(f, "unpartitionable-leftover: {}", names.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize)]
pub struct ApplicabilityReport {
    pub applicable: bool,
    pub failures: Vec<Failure>,
}

impl ApplicabilityReport {
    fn from_failures(failures: Vec<Failure>) -> Self {
        ApplicabilityReport { applicable: failures.is_empty(), failures }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReentrancyVerdict {
    /// 1-based spine position.
    pub index: usize,
    pub node: NodeId,
    /// Root nodes are exempt.
    pub checked: bool,
    #[serde(skip)]
    pub route: Option<Walk>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZPartition {
    /// `Z^i`: connected to `X_i` through `Pa(X_i) ∪ Sp(X_i)`.
    pub z_upper: Vec<Vec<NodeId>>,
    /// `Z_i`: connected to `X_i` through `Ch(X_i)`.
    pub z_lower: Vec<Vec<NodeId>>,
    /// Remaining members of `Z`, in the order they were shown separable.
    pub leftovers: Vec<NodeId>,
    /// Members of `Z` separable from neither `X` nor `Y`.
    pub unplaced: Vec<NodeId>,
    #[serde(skip)]
    pub witnesses: BTreeMap<NodeId, Walk>,
    #[serde(skip)]
    upper_ix: Vec<Vec<usize>>,
    #[serde(skip)]
    lower_ix: Vec<Vec<usize>>,
}

impl ZPartition {
    pub fn is_complete(&self) -> bool {
        self.unplaced.is_empty()
    }

    pub fn upper_indices(&self) -> &[Vec<usize>] {
        &self.upper_ix
    }

    pub fn lower_indices(&self) -> &[Vec<usize>] {
        &self.lower_ix
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub node: NodeId,
    pub numerator_set: Vec<NodeId>,
    pub denominator_set: Vec<NodeId>,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorizationResult {
    /// `σ_XY` in the conditioned diagram.
    pub base: f64,
    pub terms: Vec<Term>,
    pub value: f64,
    /// Absent when no open path exists and the value is zero by separation.
    pub theorem_used: Option<TheoremUsed>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    pub conditioned: ConditionedDiagram,
    pub x: usize,
    pub y: usize,
    pub z: Vec<usize>,
    /// `Π`, in the conditioned diagram.
    pub paths: Vec<Walk>,
    pub spine: Option<Spine>,
    pub reentrancy: Vec<ReentrancyVerdict>,
    pub partition: Option<ZPartition>,
    pub report: ApplicabilityReport,
    pub result: Option<FactorizationResult>,
    /// `σ_{XY·S}` computed directly on the original diagram.
    pub oracle: f64,
}

impl Factorization {
    pub fn is_applicable(&self) -> bool {
        self.report.applicable
    }

    /// Value agrees with the direct oracle; `None` when not applicable.
    pub fn matches_oracle(&self) -> Option<bool> {
        self.result.as_ref().map(|r| approx_eq(r.value, self.oracle, REL_TOL))
    }
}

fn role_at(path: &Walk, pos: usize) -> Role {
    if path.head_from_prev(pos) {
        Role::FromX
    } else if path.head_from_next(pos) {
        Role::FromY
    } else {
        Role::Root
    }
}

/// First collider found on any path, as a failure.
pub fn collider_failure(d: &PathDiagram, paths: &[Walk]) -> Option<Failure> {
    paths.iter().find_map(|p| {
        (1..p.len())
            .find(|&i| p.head_from_prev(i) && p.head_from_next(i))
            .map(|i| Failure::ColliderOnOpenPath {
                path: p.display(d).to_string(),
                node: d.name(p.nodes()[i]).clone(),
            })
    })
}

/// Locates the shared subpath of the collider-free paths `paths`.
pub fn find_spine(d: &PathDiagram, paths: &[Walk], mode: Mode) -> std::result::Result<Spine, Failure> {
    assert!(!paths.is_empty(), "find_spine needs at least one path");
    if let Some(f) = collider_failure(d, paths) {
        return Err(f);
    }
    let positions: Vec<BTreeMap<usize, usize>> = paths
        .iter()
        .map(|p| p.nodes().iter().enumerate().map(|(i, &v)| (v, i)).collect())
        .collect();
    let common: Vec<usize> = paths[0]
        .nodes()
        .iter()
        .copied()
        .filter(|v| positions.iter().all(|pos| pos.contains_key(v)))
        .collect();
    for pos in &positions[1..] {
        if common.windows(2).any(|w| pos[&w[0]] > pos[&w[1]]) {
            return Err(Failure::NoCommonSpine);
        }
    }
    // Maximal runs of common nodes joined by the same edge in every path.
    let joined = |a: usize, b: usize| {
        paths.iter().zip(&positions).all(|(p, pos)| {
            let (i, j) = (pos[&a], pos[&b]);
            j == i + 1 && p.links()[i] == paths[0].links()[positions[0][&a]]
        })
    };
    let mut segments: Vec<Vec<usize>> = vec![vec![common[0]]];
    for w in common.windows(2) {
        if joined(w[0], w[1]) {
            segments.last_mut().unwrap().push(w[1]);
        } else {
            segments.push(vec![w[1]]);
        }
    }
    let longest = segments.iter().map(Vec::len).max().unwrap();
    let (chosen, ties): (Vec<Vec<usize>>, Vec<Vec<usize>>) = match mode {
        Mode::Chain if longest > 1 => (segments.iter().filter(|s| s.len() > 1).cloned().collect(), Vec::new()),
        _ => {
            let first = segments.iter().position(|s| s.len() == longest).unwrap();
            let ties = segments
                .iter()
                .enumerate()
                .filter(|&(i, s)| i != first && s.len() == longest)
                .map(|(_, s)| s.clone())
                .collect();
            (vec![segments[first].clone()], ties)
        }
    };

    let members: Vec<usize> = chosen.iter().flatten().copied().collect();
    let mut roles = BTreeMap::new();
    for &v in &members {
        let mut seen = paths.iter().zip(&positions).map(|(p, pos)| role_at(p, pos[&v]));
        let first = seen.next().unwrap();
        if seen.any(|r| r != first) {
            return Err(Failure::MixedRootRole { node: d.name(v).clone() });
        }
        roles.insert(v, first);
    }
    let pos0 = &positions[0];
    let root: Vec<usize> = members.iter().copied().filter(|v| roles[v] == Role::Root).collect();
    let mut left: Vec<usize> = members.iter().copied().filter(|v| roles[v] == Role::FromY).collect();
    let right: Vec<usize> = members.iter().copied().filter(|v| roles[v] == Role::FromX).collect();
    left.sort_by_key(|v| std::cmp::Reverse(pos0[v]));
    let indices: Vec<usize> = root.iter().chain(&left).chain(&right).copied().collect();
    let variant = if root.is_empty() { Variant::Nonroot } else { Variant::Root };
    let attachment = (variant == Variant::Nonroot).then(|| {
        let x1 = indices[0];
        let i = pos0[&x1];
        let p = &paths[0];
        let bidirected_inside = [i.checked_sub(1), Some(i)].into_iter().flatten().any(|k| {
            k < p.len() && p.links()[k] == Link::Bidirected && members.contains(&p.nodes()[k]) && members.contains(&p.nodes()[k + 1])
        });
        if bidirected_inside {
            Attachment::Bidirected
        } else {
            Attachment::Arrowhead
        }
    });
    let names = |s: &[usize]| s.iter().map(|&v| d.name(v).clone()).collect::<Vec<_>>();
    Ok(Spine {
        nodes: names(&indices),
        roles: indices.iter().map(|v| roles[v]).collect(),
        m: root.len() + left.len(),
        n: right.len(),
        variant,
        attachment,
        segments: chosen.iter().map(|s| names(s)).collect(),
        ties: ties.iter().map(|s| names(s)).collect(),
        indices,
    })
}

/// Looks for `Z`-open routes `X_i -> A … B ∘-> X_i` at every non-root spine
/// node, where the stretch `A … B` does not pass through `X_i`. Other nodes
/// may repeat.
pub fn check_reentrant_routes(d: &PathDiagram, spine: &Spine, z: &[usize]) -> Vec<ReentrancyVerdict> {
    spine
        .indices
        .iter()
        .zip(&spine.roles)
        .enumerate()
        .map(|(i, (&v, &role))| {
            let checked = role != Role::Root;
            let route = checked.then(|| {
                Reach::new(d, z, Semantics::Route)
                    .passing_target(false)
                    .leaving_by_tail()
                    .arriving(Arrival::Head)
                    .find(v, v)
            });
            ReentrancyVerdict { index: i + 1, node: d.name(v).clone(), checked, route: route.flatten() }
        })
        .collect()
}

/// Greedy construction of `Z^i`, `Z_i` and the leftover ordering.
///
/// `order` fixes the candidate order; by default candidates are taken
/// lexicographically.
pub fn build_z_partition(
    d: &PathDiagram,
    spine: &Spine,
    z: &[usize],
    paths: &[Walk],
    x: usize,
    y: usize,
    order: Option<&[usize]>,
) -> Result<ZPartition> {
    let candidates: Vec<usize> = match order {
        Some(o) => o.to_vec(),
        None => z.iter().copied().collect::<BTreeSet<_>>().into_iter().collect(),
    };
    let on_paths: BTreeSet<usize> = paths.iter().flat_map(|p| p.nodes().iter().copied()).collect();
    let mut assigned: Vec<usize> = Vec::new();
    let mut taken = vec![false; d.node_count()];
    let mut witnesses = BTreeMap::new();
    let mut upper_ix = Vec::new();
    let mut lower_ix = Vec::new();

    for &xi in &spine.indices {
        let blocked: Vec<usize> = on_paths.iter().copied().filter(|&v| v != xi).collect();
        for arrival in [Arrival::Head, Arrival::Tail] {
            let mut admitted = Vec::new();
            loop {
                let mut progress = false;
                for &w in &candidates {
                    if taken[w] {
                        continue;
                    }
                    let reach = Reach::new(d, &assigned, Semantics::Path)
                        .avoiding(blocked.iter().copied())
                        .arriving(arrival);
                    if let Some(path) = reach.find_path(w, xi) {
                        taken[w] = true;
                        assigned.push(w);
                        admitted.push(w);
                        witnesses.insert(d.name(w).clone(), path);
                        progress = true;
                    }
                }
                if !progress {
                    break;
                }
            }
            match arrival {
                Arrival::Head => upper_ix.push(admitted),
                _ => lower_ix.push(admitted),
            }
        }
    }

    let mut placed: Vec<usize> = Vec::new();
    let mut cond = assigned.clone();
    let mut remaining: Vec<usize> = candidates.iter().copied().filter(|&w| !taken[w]).collect();
    while !remaining.is_empty() {
        let mut next = None;
        for (k, &w) in remaining.iter().enumerate() {
            if m_separated(d, x, w, &cond)? || m_separated(d, y, w, &cond)? {
                next = Some(k);
                break;
            }
        }
        let Some(k) = next else { break };
        let w = remaining.remove(k);
        placed.push(w);
        cond.push(w);
    }

    let names = |s: &[usize]| s.iter().map(|&v| d.name(v).clone()).collect::<Vec<_>>();
    Ok(ZPartition {
        z_upper: upper_ix.iter().map(|s| names(s)).collect(),
        z_lower: lower_ix.iter().map(|s| names(s)).collect(),
        leftovers: names(&placed),
        unplaced: names(&remaining),
        witnesses,
        upper_ix,
        lower_ix,
    })
}

fn sorted_names(d: &PathDiagram, set: &[usize]) -> Vec<NodeId> {
    d.names_of(set).into_iter().collect()
}

/// Evaluates the ratio terms on `sigma` for a complete partition.
pub fn evaluate_terms(
    d: &PathDiagram,
    sigma: &CovarianceMatrix,
    spine: &Spine,
    partition: &ZPartition,
    x: usize,
    y: usize,
) -> Result<FactorizationResult> {
    let base = sigma.get(x, y);
    let mut upper_acc: Vec<usize> = Vec::new();
    let mut lower_acc: Vec<usize> = Vec::new();
    let mut terms = Vec::with_capacity(spine.indices.len());
    for (i, &xi) in spine.indices.iter().enumerate() {
        upper_acc.extend(&partition.upper_ix[i]);
        let den_set: Vec<usize> = if i == 0 && spine.roles[0] == Role::Root {
            Vec::new()
        } else {
            upper_acc.iter().chain(&lower_acc).copied().collect()
        };
        lower_acc.extend(&partition.lower_ix[i]);
        let num_set: Vec<usize> = upper_acc.iter().chain(&lower_acc).copied().collect();
        let numerator = sigma.partial_variance(xi, &num_set)?;
        let denominator = sigma.partial_variance(xi, &den_set)?;
        terms.push(Term {
            node: d.name(xi).clone(),
            numerator_set: sorted_names(d, &num_set),
            denominator_set: sorted_names(d, &den_set),
            numerator,
            denominator,
            ratio: numerator / denominator,
        });
    }
    let value = base * terms.iter().map(|t| t.ratio).product::<f64>();
    let theorem_used = Some(match (spine.segments.len(), spine.variant) {
        (1, Variant::Root) => TheoremUsed::Root,
        (1, Variant::Nonroot) => TheoremUsed::Nonroot,
        _ => TheoremUsed::Chained,
    });
    Ok(FactorizationResult { base, terms, value, theorem_used })
}

/// Runs the full pipeline for `σ_{XY·S}`.
pub fn factorize<S: AsRef<str>>(original: &PathDiagram, x: &str, y: &str, s: &[S], mode: Mode) -> Result<Factorization> {
    original.ensure_valid()?;
    let (ox, oy) = (original.index_of(x)?, original.index_of(y)?);
    let s_ix = original.indices_of(s)?;
    if ox == oy || s_ix.contains(&ox) || s_ix.contains(&oy) {
        return Err(Error::MalformedQuery("X and Y must differ and lie outside S".into()));
    }
    let oracle = gaussian::implied_covariance(original)?.partial_covariance(ox, oy, &s_ix)?;
    let conditioned = conditioning::condition(original, s)?;
    let d = &conditioned.diagram;
    let (x, y) = (d.index_of(x)?, d.index_of(y)?);
    let z = conditioned.z();
    let paths = separation::enumerate_open_paths(d, x, y, &z, DEFAULT_PATH_CAP)?;
    let mut out = Factorization {
        conditioned: conditioned.clone(),
        x,
        y,
        z: z.clone(),
        paths: paths.clone(),
        spine: None,
        reentrancy: Vec::new(),
        partition: None,
        report: ApplicabilityReport::from_failures(Vec::new()),
        result: None,
        oracle,
    };
    if paths.is_empty() {
        out.result = Some(FactorizationResult { base: 0.0, terms: Vec::new(), value: 0.0, theorem_used: None });
        return Ok(out);
    }
    let spine = match find_spine(d, &paths, mode) {
        Ok(s) => s,
        Err(f) => {
            out.report = ApplicabilityReport::from_failures(vec![f]);
            return Ok(out);
        }
    };
    let mut failures = Vec::new();
    out.reentrancy = check_reentrant_routes(d, &spine, &z);
    for r in &out.reentrancy {
        if let Some(route) = &r.route {
            failures.push(Failure::ReentrantRoute {
                index: r.index,
                node: r.node.clone(),
                route: route.display(d).to_string(),
            });
        }
    }
    let partition = build_z_partition(d, &spine, &z, &paths, x, y, None)?;
    if !partition.is_complete() {
        failures.push(Failure::UnpartitionableLeftover { nodes: partition.unplaced.clone() });
    }
    if failures.is_empty() {
        let sigma = gaussian::implied_covariance(d)?;
        out.result = Some(evaluate_terms(d, &sigma, &spine, &partition, x, y)?);
    }
    out.report = ApplicabilityReport::from_failures(failures);
    out.spine = Some(spine);
    out.partition = Some(partition);
    Ok(out)
}

/// Single shared subpath.
pub fn factorized_partial_covariance<S: AsRef<str>>(
    original: &PathDiagram,
    x: &str,
    y: &str,
    s: &[S],
) -> Result<Factorization> {
    factorize(original, x, y, s, Mode::Single)
}

/// Every shared subpath with at least one edge.
pub fn chained_factorization<S: AsRef<str>>(original: &PathDiagram, x: &str, y: &str, s: &[S]) -> Result<Factorization> {
    factorize(original, x, y, s, Mode::Chain)
}

/// `0` inside the band `|v| <= 1e-9 * scale`, otherwise `±1`.
pub fn sign_with_tol(v: f64, scale: f64) -> i8 {
    if v.abs() <= REL_TOL * scale.max(f64::MIN_POSITIVE) {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignVerdict {
    /// `sign(σ_XY)` in the original diagram.
    pub base: i8,
    pub s1: i8,
    pub s2: i8,
    /// `sign(σ_XY)` in each conditioned diagram, the covariance the factorization starts from.
    pub conditioned_base1: i8,
    pub conditioned_base2: i8,
    pub agree: bool,
}

/// Compares `sign(σ_XY)`, `sign(σ_{XY·S₁})` and `sign(σ_{XY·S₂})`.
pub fn sign_preservation_check<S: AsRef<str>, T: AsRef<str>>(
    original: &PathDiagram,
    x: &str,
    y: &str,
    s1: &[S],
    s2: &[T],
) -> Result<SignVerdict> {
    let f1 = factorized_partial_covariance(original, x, y, s1)?;
    let f2 = factorized_partial_covariance(original, x, y, s2)?;
    for f in [&f1, &f2] {
        if !f.is_applicable() {
            let why: Vec<String> = f.report.failures.iter().map(ToString::to_string).collect();
            return Err(Error::NotApplicable(why.join("; ")));
        }
    }
    let sigma = gaussian::implied_covariance(original)?;
    let (ox, oy) = (original.index_of(x)?, original.index_of(y)?);
    let scale = (sigma.get(ox, ox) * sigma.get(oy, oy)).sqrt();
    let base = sign_with_tol(sigma.get(ox, oy), scale);
    let v1 = sign_with_tol(f1.oracle, scale);
    let v2 = sign_with_tol(f2.oracle, scale);
    let cb = |f: &Factorization| sign_with_tol(f.result.as_ref().unwrap().base, scale);
    Ok(SignVerdict {
        base,
        s1: v1,
        s2: v2,
        conditioned_base1: cb(&f1),
        conditioned_base2: cb(&f2),
        agree: base == v1 && v1 == v2,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderInvarianceReport {
    pub trials: usize,
    /// Orders whose partition was complete.
    pub complete: usize,
    /// Complete orders whose value disagreed with the oracle.
    pub value_divergences: usize,
    /// Complete orders whose `Z^i`/`Z_i` sets differ from the default.
    pub partition_divergences: usize,
}

/// Re-runs the partition with `trials` random candidate orders. Reports
/// divergences; asserts nothing.
pub fn order_invariance(f: &Factorization, trials: usize, seed: u64) -> Result<OrderInvarianceReport> {
    let mut report = OrderInvarianceReport { trials, complete: 0, value_divergences: 0, partition_divergences: 0 };
    let (Some(spine), Some(default)) = (&f.spine, &f.partition) else {
        report.trials = 0;
        return Ok(report);
    };
    let d = &f.conditioned.diagram;
    let sigma = gaussian::implied_covariance(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = f.z.clone();
    for _ in 0..trials {
        order.shuffle(&mut rng);
        let p = build_z_partition(d, spine, &f.z, &f.paths, f.x, f.y, Some(&order))?;
        if !p.is_complete() {
            continue;
        }
        report.complete += 1;
        let as_sets = |q: &ZPartition| {
            q.upper_ix
                .iter()
                .chain(&q.lower_ix)
                .map(|s| s.iter().copied().collect::<BTreeSet<_>>())
                .collect::<Vec<_>>()
        };
        if as_sets(&p) != as_sets(default) {
            report.partition_divergences += 1;
        }
        let r = evaluate_terms(d, &sigma, spine, &p, f.x, f.y)?;
        if !approx_eq(r.value, f.oracle, REL_TOL) {
            report.value_divergences += 1;
        }
    }
    Ok(report)
}
