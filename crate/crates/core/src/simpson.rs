//! Collapsibility of association measures over a conditioning set, and
//! randomized search for sign reversals of the regression coefficient.
//!
//! For Gaussian models the conditional covariance does not depend on the
//! value of the conditioning variables, so `E_s[g(p(x, y | s))] = g(p(x, y))`
//! reduces to comparing the partial and the marginal quantity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::diagram::{NodeId, PathDiagram};
use crate::error::{Error, Result};
use crate::gaussian::{self, approx_eq, REL_TOL};
use crate::harness::{self, GeneratorConfig};

pub const WITNESS_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AssociationMeasure {
    Covariance,
    RegressionCoefficient,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Collapsibility {
    pub measure: AssociationMeasure,
    pub marginal: f64,
    pub conditional: f64,
    pub collapsible: bool,
}

fn query_indices<S: AsRef<str>>(d: &PathDiagram, x: &str, y: &str, s: &[S]) -> Result<(usize, usize, Vec<usize>)> {
    let (xi, yi) = (d.index_of(x)?, d.index_of(y)?);
    let si = d.indices_of(s)?;
    if xi == yi || si.contains(&xi) || si.contains(&yi) {
        return Err(Error::MalformedQuery("X and Y must differ and lie outside S".into()));
    }
    Ok((xi, yi, si))
}

pub fn collapsibility_check<S: AsRef<str>>(
    d: &PathDiagram,
    x: &str,
    y: &str,
    s: &[S],
    measure: AssociationMeasure,
) -> Result<Collapsibility> {
    let (xi, yi, si) = query_indices(d, x, y, s)?;
    let sigma = gaussian::implied_covariance(d)?;
    let (marginal, conditional) = match measure {
        AssociationMeasure::Covariance => (sigma.get(xi, yi), sigma.partial_covariance(xi, yi, &si)?),
        AssociationMeasure::RegressionCoefficient => {
            (sigma.regression_coefficient(yi, xi, &[])?, sigma.regression_coefficient(yi, xi, &si)?)
        }
    };
    Ok(Collapsibility { measure, marginal, conditional, collapsible: approx_eq(marginal, conditional, REL_TOL) })
}

/// One of the four three-node diagrams over `X`, `Y`, `S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ThreeNode {
    /// `S <- X -> Y`
    ForkAtX,
    /// `S -> X -> Y`
    ChainIntoX,
    /// `X -> Y <- S`
    ColliderAtY,
    /// `X -> Y -> S`
    ChainOutOfY,
}

impl ThreeNode {
    pub const ALL: [ThreeNode; 4] = [ThreeNode::ForkAtX, ThreeNode::ChainIntoX, ThreeNode::ColliderAtY, ThreeNode::ChainOutOfY];

    pub fn label(self) -> &'static str {
        match self {
            ThreeNode::ForkAtX => "S <- X -> Y",
            ThreeNode::ChainIntoX => "S -> X -> Y",
            ThreeNode::ColliderAtY => "X -> Y <- S",
            ThreeNode::ChainOutOfY => "X -> Y -> S",
        }
    }

    /// `(covariance collapsible, regression coefficient collapsible)` for
    /// nonzero parameters.
    pub fn expected(self) -> (bool, bool) {
        match self {
            ThreeNode::ForkAtX | ThreeNode::ChainIntoX => (false, true),
            ThreeNode::ColliderAtY => (true, true),
            ThreeNode::ChainOutOfY => (false, false),
        }
    }

    pub fn diagram(self, a: f64, b: f64, vx: f64, vy: f64, vs: f64) -> PathDiagram {
        let builder = PathDiagram::builder().variance("X", vx).variance("Y", vy).variance("S", vs);
        let builder = match self {
            ThreeNode::ForkAtX => builder.directed("X", "S", a).directed("X", "Y", b),
            ThreeNode::ChainIntoX => builder.directed("S", "X", a).directed("X", "Y", b),
            ThreeNode::ColliderAtY => builder.directed("X", "Y", a).directed("S", "Y", b),
            ThreeNode::ChainOutOfY => builder.directed("X", "Y", a).directed("Y", "S", b),
        };
        builder.build().expect("three-node diagrams are acyclic")
    }

    /// The closed form of `σ_{XY·S}` in terms of marginal and partial
    /// variances.
    fn closed_form(self, sigma: &gaussian::CovarianceMatrix) -> Result<f64> {
        let (x, y, s) = (sigma.index_of("X")?, sigma.index_of("Y")?, sigma.index_of("S")?);
        let cov = sigma.get(x, y);
        Ok(match self {
            ThreeNode::ForkAtX | ThreeNode::ChainIntoX => cov * sigma.partial_variance(x, &[s])? / sigma.get(x, x),
            ThreeNode::ColliderAtY => cov,
            ThreeNode::ChainOutOfY => cov * sigma.partial_variance(y, &[s])? / sigma.get(y, y),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteCase {
    pub diagram: &'static str,
    pub expected_covariance_collapsible: bool,
    pub expected_regression_collapsible: bool,
    pub trials: usize,
    /// Parameterizations where both verdicts matched the expectation.
    pub agreeing: usize,
    /// Parameterizations where the closed form matched the oracle.
    pub closed_form_holds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub cases: Vec<SuiteCase>,
    pub all_agree: bool,
}

/// Checks the collapsibility verdicts and closed forms of the four
/// three-node diagrams over `trials` random parameterizations each.
pub fn four_diagram_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for shape in ThreeNode::ALL {
        let (cov_expected, reg_expected) = shape.expected();
        let mut case = SuiteCase {
            diagram: shape.label(),
            expected_covariance_collapsible: cov_expected,
            expected_regression_collapsible: reg_expected,
            trials,
            agreeing: 0,
            closed_form_holds: 0,
        };
        for _ in 0..trials {
            let coef = |rng: &mut ChaCha8Rng| {
                let m: f64 = rng.random_range(0.1..=2.0);
                if rng.random_bool(0.5) { m } else { -m }
            };
            let (a, b) = (coef(&mut rng), coef(&mut rng));
            let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.5..=2.0));
            let d = shape.diagram(a, b, v[0], v[1], v[2]);
            let cov = collapsibility_check(&d, "X", "Y", &["S"], AssociationMeasure::Covariance)?;
            let reg = collapsibility_check(&d, "X", "Y", &["S"], AssociationMeasure::RegressionCoefficient)?;
            if cov.collapsible == cov_expected && reg.collapsible == reg_expected {
                case.agreeing += 1;
            }
            let sigma = gaussian::implied_covariance(&d)?;
            if approx_eq(shape.closed_form(&sigma)?, cov.conditional, REL_TOL) {
                case.closed_form_holds += 1;
            }
        }
        cases.push(case);
    }
    let all_agree = cases.iter().all(|c| c.agreeing == c.trials && c.closed_form_holds == c.trials);
    Ok(SuiteReport { cases, all_agree })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimpsonWitness {
    pub trial: usize,
    #[serde(skip)]
    pub diagram: PathDiagram,
    /// `β_YX`
    pub marginal: f64,
    /// `β_{YX·S}`
    pub conditional: f64,
}

/// The parameter ranges used by the witness search.
pub fn witness_parameters(seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        coefficient_range: (0.1, 2.0),
        variance_range: (0.5, 2.0),
        correlation_range: (0.1, 0.9),
        seed,
        ..GeneratorConfig::default()
    }
}

fn reversal(d: &PathDiagram, x: usize, y: usize, s: &[usize]) -> Result<Option<(f64, f64)>> {
    let sigma = gaussian::implied_covariance(d)?;
    let marginal = sigma.regression_coefficient(y, x, &[])?;
    let conditional = sigma.regression_coefficient(y, x, s)?;
    let big = |v: f64| v.abs() > WITNESS_FLOOR;
    Ok((big(marginal) && big(conditional) && marginal.signum() != conditional.signum()).then_some((marginal, conditional)))
}

/// Redraws the parameters of `d` up to `trials` times looking for
/// `sign(β_{YX·S}) ≠ sign(β_YX)`. Trials are independent and seeded by index;
/// the lowest-indexed witness is returned.
pub fn simpson_witness_search<S: AsRef<str>>(
    d: &PathDiagram,
    x: &str,
    y: &str,
    s: &[S],
    trials: usize,
    seed: u64,
) -> Result<Option<SimpsonWitness>> {
    d.ensure_valid()?;
    let (xi, yi, si) = query_indices(d, x, y, s)?;
    let cfg = witness_parameters(seed);
    let found = (0..trials).into_par_iter().find_map_first(|trial| {
        let mut rng = ChaCha8Rng::seed_from_u64(harness::trial_seed(seed, trial as u64));
        let candidate = harness::reparameterize(d, &cfg, &mut rng).ok()?;
        let (marginal, conditional) = reversal(&candidate, xi, yi, &si).ok()??;
        Some(SimpsonWitness { trial, diagram: candidate, marginal, conditional })
    });
    Ok(found)
}

/// Names of `S` as node ids, for callers holding strings.
pub fn ids<S: AsRef<str>>(s: &[S]) -> Result<Vec<NodeId>> {
    s.iter().map(|n| NodeId::new(n.as_ref())).collect()
}
