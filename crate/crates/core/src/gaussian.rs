//! Exact Gaussian numerics: implied covariance, partial covariances by Schur
//! complement, Wright's path rule and the covariance-update identities used
//! by the factorization.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::diagram::{Link, NodeId, PathDiagram};
use crate::error::{Error, Result};
use crate::linalg;
use crate::separation::{self, Walk};

pub const REL_TOL: f64 = 1e-9;
pub const ABS_FLOOR: f64 = 1e-12;

/// `|a - b| <= rel * max(|a|, |b|)`, or both within [`ABS_FLOOR`] of each other.
pub fn approx_eq(a: f64, b: f64, rel: f64) -> bool {
    let diff = (a - b).abs();
    diff <= ABS_FLOOR || diff <= rel * a.abs().max(b.abs())
}

/// Symmetric positive definite matrix indexed by diagram nodes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceMatrix {
    names: Vec<NodeId>,
    #[serde(serialize_with = "rows")]
    values: DMatrix<f64>,
}

fn rows<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<f64> = m.row(i).iter().copied().collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

impl CovarianceMatrix {
    pub fn new(names: Vec<NodeId>, values: DMatrix<f64>) -> Result<CovarianceMatrix> {
        let n = names.len();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::Numerical(format!(
                "{}x{} matrix for {n} names",
                values.nrows(),
                values.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..i {
                if !approx_eq(values[(i, j)], values[(j, i)], REL_TOL) {
                    return Err(Error::Numerical(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        if let Err(p) = linalg::cholesky(&values) {
            return Err(Error::Numerical(format!("covariance not positive definite (pivot {p:.3e})")));
        }
        Ok(CovarianceMatrix { names, values })
    }

    pub fn names(&self) -> &[NodeId] {
        &self.names
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n.as_str() == name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    fn check_query(&self, x: usize, y: usize, z: &[usize]) -> Result<()> {
        let n = self.dim();
        if x >= n || y >= n || z.iter().any(|&v| v >= n) {
            return Err(Error::MalformedQuery("node index out of range".into()));
        }
        if z.contains(&x) || z.contains(&y) {
            return Err(Error::MalformedQuery("queried node lies in the conditioning set".into()));
        }
        Ok(())
    }

    /// `σ_{XY·Z} = Σ_XY − Σ_XZ Σ_ZZ⁻¹ Σ_ZY`.
    pub fn partial_covariance(&self, x: usize, y: usize, z: &[usize]) -> Result<f64> {
        self.check_query(x, y, z)?;
        let z = dedup(z);
        linalg::schur_block(&self.values, &[x], &[y], &z)
            .map(|m| m[(0, 0)])
            .map_err(|p| Error::Numerical(format!("Σ_ZZ numerically singular (pivot {p:.3e})")))
    }

    pub fn partial_variance(&self, x: usize, z: &[usize]) -> Result<f64> {
        self.partial_covariance(x, x, z)
    }

    /// `β_{YX·Z} = σ_{XY·Z} / σ²_{X·Z}`.
    pub fn regression_coefficient(&self, y: usize, x: usize, z: &[usize]) -> Result<f64> {
        let v = self.partial_variance(x, z)?;
        if v <= 0.0 {
            return Err(Error::Numerical("zero partial variance".into()));
        }
        Ok(self.partial_covariance(x, y, z)? / v)
    }

    /// Covariance of the remaining nodes after partialling out `z`.
    pub fn condition_on(&self, z: &[usize]) -> Result<CovarianceMatrix> {
        let z = dedup(z);
        let keep: Vec<usize> = (0..self.dim()).filter(|i| !z.contains(i)).collect();
        let m = linalg::schur_block(&self.values, &keep, &keep, &z)
            .map_err(|p| Error::Numerical(format!("Σ_ZZ numerically singular (pivot {p:.3e})")))?;
        let m = (&m + m.transpose()) * 0.5;
        let names = keep.iter().map(|&i| self.names[i].clone()).collect();
        CovarianceMatrix::new(names, m)
    }

    pub fn query(&self, q: &PartialQuery) -> Result<f64> {
        let x = self.index_of(q.x.as_str())?;
        let y = self.index_of(q.y.as_str())?;
        let z = q.z.iter().map(|n| self.index_of(n.as_str())).collect::<Result<Vec<_>>>()?;
        self.partial_covariance(x, y, &z)
    }
}

fn dedup(z: &[usize]) -> Vec<usize> {
    let set: BTreeSet<usize> = z.iter().copied().collect();
    set.into_iter().collect()
}

/// `σ_{XY·Z}` by name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialQuery {
    pub x: NodeId,
    pub y: NodeId,
    pub z: BTreeSet<NodeId>,
}

/// `Σ = (I − Λ)^{-T} Ω (I − Λ)^{-1}`, with nodes in the diagram's order.
pub fn implied_covariance(d: &PathDiagram) -> Result<CovarianceMatrix> {
    d.ensure_valid()?;
    let n = d.node_count();
    let a = DMatrix::<f64>::identity(n, n) - d.coefficient_matrix().transpose();
    let lu = a.clone().lu();
    let m = lu
        .solve(&d.error_covariance_matrix())
        .ok_or_else(|| Error::Numerical("I − Λ is singular".into()))?;
    let sigma = lu
        .solve(&m.transpose())
        .ok_or_else(|| Error::Numerical("I − Λ is singular".into()))?
        .transpose();
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    CovarianceMatrix::new(d.names().to_vec(), sigma)
}

pub fn partial_covariance(sigma: &CovarianceMatrix, q: &PartialQuery) -> Result<f64> {
    sigma.query(q)
}

pub fn partial_variance(sigma: &CovarianceMatrix, x: &NodeId, z: &BTreeSet<NodeId>) -> Result<f64> {
    sigma.query(&PartialQuery { x: x.clone(), y: x.clone(), z: z.clone() })
}

pub fn regression_coefficient(sigma: &CovarianceMatrix, y: usize, x: usize, z: &[usize]) -> Result<f64> {
    sigma.regression_coefficient(y, x, z)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WrightTerm {
    pub path: Walk,
    pub monomial: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WrightDecomposition {
    pub terms: Vec<WrightTerm>,
    pub total: f64,
}

/// Decomposes `σ_XY` into one monomial per ∅-open path.
pub fn wright_covariance(d: &PathDiagram, x: usize, y: usize) -> Result<WrightDecomposition> {
    let sigma = implied_covariance(d)?;
    let paths = separation::enumerate_open_paths(d, x, y, &[], separation::DEFAULT_PATH_CAP)?;
    let mut terms = Vec::with_capacity(paths.len());
    for path in paths {
        terms.push(WrightTerm { monomial: monomial(d, &sigma, &path)?, path });
    }
    let total = terms.iter().map(|t| t.monomial).sum();
    Ok(WrightDecomposition { terms, total })
}

fn monomial(d: &PathDiagram, sigma: &CovarianceMatrix, path: &Walk) -> Result<f64> {
    let nodes = path.nodes();
    let mut m = 1.0;
    let mut bidirected = 0;
    for (i, &link) in path.links().iter().enumerate() {
        let (u, v) = (nodes[i], nodes[i + 1]);
        m *= match link {
            Link::Forward => d.coefficient(u, v),
            Link::Backward => d.coefficient(v, u),
            Link::Bidirected => {
                bidirected += 1;
                d.error_covariance(u, v)
            }
        }
        .expect("walk edges exist");
    }
    let colliders = (1..path.len()).filter(|&p| path.head_from_prev(p) && path.head_from_next(p)).count();
    if colliders > 0 || bidirected > 1 {
        return Err(Error::Numerical("∅-open path with a collider or two bidirected edges".into()));
    }
    if bidirected == 0 {
        let root = (0..=path.len())
            .find(|&p| !path.head_from_prev(p) && !path.head_from_next(p))
            .expect("collider-free path without bidirected edge has a root");
        m *= sigma.get(nodes[root], nodes[root]);
    }
    Ok(m)
}

/// `σ_{XY·Z} σ²_{R·ZW} / σ²_{R·Z}`, which equals `σ_{XY·ZW}` when
/// `X ⟂ W | Z ∪ R`, `Y ⟂ W | Z ∪ R` and `X ⟂ Y | Z ∪ R`.
pub fn lemma_aux1_update(
    sigma: &CovarianceMatrix,
    x: usize,
    y: usize,
    r: usize,
    w: usize,
    z: &[usize],
) -> Result<f64> {
    let zw = with(z, w);
    Ok(sigma.partial_covariance(x, y, z)? * sigma.partial_variance(r, &zw)? / sigma.partial_variance(r, z)?)
}

/// `σ_{XY·Z} σ²_{X·ZW} / σ²_{X·Z}`, which equals `σ_{XY·ZW}` when `Y ⟂ W | Z ∪ X`.
pub fn lemma_aux2_update(sigma: &CovarianceMatrix, x: usize, y: usize, w: usize, z: &[usize]) -> Result<f64> {
    lemma_aux1_update(sigma, x, y, x, w, z)
}

/// `σ_{XY·Z}`, which equals `σ_{XY·ZW}` when `X ⟂ W | Z` or `Y ⟂ W | Z`.
pub fn lemma_aux3_update(sigma: &CovarianceMatrix, x: usize, y: usize, w: usize, z: &[usize]) -> Result<f64> {
    if z.contains(&w) || w == x || w == y {
        return Err(Error::MalformedQuery("W must be a new node".into()));
    }
    sigma.partial_covariance(x, y, z)
}

fn with(z: &[usize], w: usize) -> Vec<usize> {
    let mut v = z.to_vec();
    v.push(w);
    v
}

/// Separation premises of the three update identities, decided on `d`.
pub mod premises {
    use super::with;
    use crate::diagram::PathDiagram;
    use crate::error::Result;
    use crate::separation::m_separated;

    pub fn aux1(d: &PathDiagram, x: usize, y: usize, r: usize, w: usize, z: &[usize]) -> Result<bool> {
        let zr = with(z, r);
        let sep = |a: usize| -> Result<bool> { if a == r { Ok(true) } else { m_separated(d, a, w, &zr) } };
        let xy = x == r || y == r || m_separated(d, x, y, &zr)?;
        Ok(sep(x)? && sep(y)? && xy)
    }

    pub fn aux2(d: &PathDiagram, x: usize, y: usize, w: usize, z: &[usize]) -> Result<bool> {
        m_separated(d, y, w, &with(z, x))
    }

    pub fn aux3(d: &PathDiagram, x: usize, y: usize, w: usize, z: &[usize]) -> Result<bool> {
        Ok(m_separated(d, x, w, z)? || m_separated(d, y, w, z)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xyz(alpha: f64, delta: f64) -> PathDiagram {
        PathDiagram::builder().directed("X", "Y", alpha).directed("Y", "Z", delta).build().unwrap()
    }

    #[test]
    fn xyz_implied_covariance() {
        let s = implied_covariance(&xyz(1.0, 1.0)).unwrap();
        let (x, y, z) = (0, 1, 2);
        let expect = [(x, x, 1.0), (x, y, 1.0), (y, y, 2.0), (y, z, 2.0), (z, z, 3.0), (x, z, 1.0)];
        for (i, j, v) in expect {
            assert!(approx_eq(s.get(i, j), v, REL_TOL), "Σ[{i},{j}] = {}", s.get(i, j));
        }
        assert!(approx_eq(s.partial_covariance(x, y, &[z]).unwrap(), 1.0 / 3.0, REL_TOL));
        assert_eq!(s.partial_covariance(x, y, &[]).unwrap(), s.get(x, y));
    }

    #[test]
    fn covariance_scales_with_alpha() {
        for alpha in [-1.7, 0.3, 2.5] {
            let d = xyz(alpha, 1.0).with_error_variance(0, 1.8);
            let s = implied_covariance(&d).unwrap();
            assert!(approx_eq(s.get(0, 1), alpha * 1.8, REL_TOL));
        }
    }

    #[test]
    fn no_edges_gives_omega() {
        let d = PathDiagram::builder()
            .bidirected("A", "B", 0.4)
            .variance("A", 2.0)
            .node("C")
            .build()
            .unwrap();
        let s = implied_covariance(&d).unwrap();
        assert_eq!(s.values(), &d.error_covariance_matrix());
    }

    #[test]
    fn separated_pairs_have_zero_partial_covariance() {
        let d = xyz(0.7, -1.3);
        let s = implied_covariance(&d).unwrap();
        assert!(s.partial_covariance(0, 2, &[1]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn wright_on_fig1() {
        let d = xyz(1.0, 1.0);
        let w = wright_covariance(&d, 0, 1).unwrap();
        assert_eq!(w.terms.len(), 1);
        assert!(approx_eq(w.total, 1.0, REL_TOL));
        let w = wright_covariance(&d, 0, 2).unwrap();
        assert!(approx_eq(w.total, 1.0, REL_TOL));
    }

    #[test]
    fn wright_with_confounding() {
        // X <- C -> Y, X <-> Y, X -> Y
        let d = PathDiagram::builder()
            .directed("C", "X", 0.8)
            .directed("C", "Y", -0.5)
            .directed("X", "Y", 1.2)
            .bidirected("X", "Y", 0.3)
            .variance("C", 1.5)
            .build()
            .unwrap();
        let (x, y) = (d.index_of("X").unwrap(), d.index_of("Y").unwrap());
        let w = wright_covariance(&d, x, y).unwrap();
        assert_eq!(w.terms.len(), 3);
        let s = implied_covariance(&d).unwrap();
        assert!(approx_eq(w.total, s.get(x, y), REL_TOL));
    }

    #[test]
    fn wright_disconnected() {
        let d = PathDiagram::builder().node("X").node("Y").build().unwrap();
        let w = wright_covariance(&d, 0, 1).unwrap();
        assert!(w.terms.is_empty());
        assert_eq!(w.total, 0.0);
    }

    #[test]
    fn aux1_on_fig1() {
        let d = xyz(1.0, 1.0);
        let s = implied_covariance(&d).unwrap();
        let (x, y, z) = (0, 1, 2);
        // R = Y, W = Z, Z = ∅
        assert!(premises::aux1(&d, x, y, y, z, &[]).unwrap());
        let v = lemma_aux1_update(&s, x, y, y, z, &[]).unwrap();
        assert!(approx_eq(v, 1.0 / 3.0, REL_TOL));
    }

    #[test]
    fn aux3_ignores_irrelevant_node() {
        let d = xyz(1.0, 1.0);
        let d = PathDiagram::from_parts(
            d.names().iter().cloned().chain([NodeId::new("W").unwrap()]),
            d.edges().to_vec(),
            &d.variance_map(),
        );
        let s = implied_covariance(&d).unwrap();
        let [w, x, y, z] = ["W", "X", "Y", "Z"].map(|n| d.index_of(n).unwrap());
        assert!(premises::aux3(&d, x, y, w, &[z]).unwrap());
        let v = lemma_aux3_update(&s, x, y, w, &[z]).unwrap();
        assert!(approx_eq(v, s.partial_covariance(x, y, &[z, w]).unwrap(), REL_TOL));
    }

    #[test]
    fn regression_through_child() {
        // S <- X -> Y: conditioning on S leaves β_{YX} unchanged
        let d = PathDiagram::builder().directed("X", "S", 0.9).directed("X", "Y", 1.4).build().unwrap();
        let s = implied_covariance(&d).unwrap();
        let (sx, x, y) = (0, 1, 2);
        let beta = s.regression_coefficient(y, x, &[]).unwrap();
        assert!(approx_eq(beta, 1.4, REL_TOL));
        assert!(approx_eq(s.regression_coefficient(y, x, &[sx]).unwrap(), beta, REL_TOL));
    }

    #[test]
    fn one_step_schur_matches_direct() {
        let d = PathDiagram::builder()
            .directed("A", "B", 0.5)
            .directed("B", "C", -0.7)
            .directed("A", "D", 1.1)
            .bidirected("C", "D", 0.2)
            .build()
            .unwrap();
        let s = implied_covariance(&d).unwrap();
        let reduced = s.condition_on(&[1]).unwrap();
        // reduced order: A, C, D
        let direct = s.partial_covariance(2, 3, &[0, 1]).unwrap();
        let stepped = reduced.partial_covariance(1, 2, &[0]).unwrap();
        assert!((direct - stepped).abs() < 1e-10);
    }

    #[test]
    fn rejects_query_through_z() {
        let s = implied_covariance(&xyz(1.0, 1.0)).unwrap();
        assert!(s.partial_covariance(0, 1, &[1]).is_err());
        let q = PartialQuery {
            x: NodeId::new("X").unwrap(),
            y: NodeId::new("Y").unwrap(),
            z: [NodeId::new("Z").unwrap()].into(),
        };
        assert!(approx_eq(partial_covariance(&s, &q).unwrap(), 1.0 / 3.0, REL_TOL));
    }
}
