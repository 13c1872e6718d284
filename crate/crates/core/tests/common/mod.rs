//! Oracles written independently of the library's own numerics and search.

#![allow(dead_code)]

use condpath::{EdgeKind, Link, PathDiagram};
use nalgebra::DMatrix;

/// `Σ = B Ω Bᵀ` with `B = (I − Λᵀ)⁻¹` by explicit inversion, built from the
/// edge list.
pub fn sigma(d: &PathDiagram) -> DMatrix<f64> {
    let n = d.node_count();
    let mut lambda = DMatrix::<f64>::zeros(n, n);
    let mut omega = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        omega[(i, i)] = d.error_variance(i);
    }
    for e in d.edges() {
        let (a, b) = (d.index_of(e.tail.as_str()).unwrap(), d.index_of(e.head.as_str()).unwrap());
        match e.kind {
            EdgeKind::Directed => lambda[(a, b)] = e.weight,
            EdgeKind::Bidirected => {
                omega[(a, b)] = e.weight;
                omega[(b, a)] = e.weight;
            }
        }
    }
    let b = (DMatrix::<f64>::identity(n, n) - lambda.transpose()).try_inverse().expect("acyclic");
    &b * omega * b.transpose()
}

/// `σ_{XY·Z}` from the precision matrix of `{X, Y} ∪ Z`: the conditional
/// covariance of `(X, Y)` is the inverse of the leading 2×2 precision block.
pub fn pcov(sigma: &DMatrix<f64>, x: usize, y: usize, z: &[usize]) -> f64 {
    if x == y {
        let idx: Vec<usize> = std::iter::once(x).chain(z.iter().copied()).collect();
        let p = sigma.select_rows(&idx).select_columns(&idx).try_inverse().unwrap();
        return 1.0 / p[(0, 0)];
    }
    let idx: Vec<usize> = [x, y].into_iter().chain(z.iter().copied()).collect();
    let p = sigma.select_rows(&idx).select_columns(&idx).try_inverse().unwrap();
    let block = p.view((0, 0), (2, 2)).into_owned().try_inverse().unwrap();
    block[(0, 1)]
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    let diff = (a - b).abs();
    diff <= 1e-12 || diff <= rel * a.abs().max(b.abs())
}

/// Ancestors of `z` (including `z`) by walking parent edges.
pub fn ancestors(d: &PathDiagram, z: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; d.node_count()];
    let mut stack: Vec<usize> = z.to_vec();
    while let Some(v) = stack.pop() {
        if std::mem::replace(&mut seen[v], true) {
            continue;
        }
        for inc in d.incident(v) {
            if inc.link == Link::Backward {
                stack.push(inc.other);
            }
        }
    }
    seen
}

/// Is the simple path `nodes`/`links` open given `z`?
pub fn path_open(nodes: &[usize], links: &[Link], in_z: &[bool], an_z: &[bool]) -> bool {
    (1..nodes.len() - 1).all(|k| {
        let v = nodes[k];
        let collider = links[k - 1].head_at_end() && links[k].head_at_start();
        if collider {
            an_z[v]
        } else {
            !in_z[v]
        }
    })
}

/// Every simple path from `x` to `y`, as node and link sequences.
pub fn simple_paths(d: &PathDiagram, x: usize, y: usize) -> Vec<(Vec<usize>, Vec<Link>)> {
    fn go(d: &PathDiagram, y: usize, nodes: &mut Vec<usize>, links: &mut Vec<Link>, out: &mut Vec<(Vec<usize>, Vec<Link>)>) {
        let v = *nodes.last().unwrap();
        if v == y {
            out.push((nodes.clone(), links.clone()));
            return;
        }
        for inc in d.incident(v) {
            if nodes.contains(&inc.other) {
                continue;
            }
            nodes.push(inc.other);
            links.push(inc.link);
            go(d, y, nodes, links, out);
            nodes.pop();
            links.pop();
        }
    }
    let mut out = Vec::new();
    go(d, y, &mut vec![x], &mut Vec::new(), &mut out);
    out
}

/// Is there an open simple path from `x` to `y` given `z`?
pub fn connected(d: &PathDiagram, x: usize, y: usize, z: &[usize]) -> bool {
    let mut in_z = vec![false; d.node_count()];
    for &v in z {
        in_z[v] = true;
    }
    let an = ancestors(d, z);
    simple_paths(d, x, y).iter().any(|(n, l)| path_open(n, l, &in_z, &an))
}
