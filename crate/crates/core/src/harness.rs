//! Random instances and the bulk sweeps run against the oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::diagram::{Edge, EdgeKind, NodeId, PathDiagram, Violation};
use crate::error::{Error, Result};
use crate::factorize::{self, Mode};
use crate::format;
use crate::gaussian::{self, ABS_FLOOR, REL_TOL};

pub const MAX_PD_ATTEMPTS: usize = 100;
pub const LOADING_STEP: f64 = 0.1;
pub const LOADING_STEPS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorConfig {
    pub node_count: usize,
    /// Probability that a pair of nodes is adjacent. Ignored for trees.
    pub edge_density: f64,
    pub bidirected_fraction: f64,
    pub singly_connected: bool,
    /// Magnitudes of path coefficients; the sign is drawn separately.
    pub coefficient_range: (f64, f64),
    pub variance_range: (f64, f64),
    /// Magnitudes of error correlations on bidirected edges.
    pub correlation_range: (f64, f64),
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            node_count: 6,
            edge_density: 0.4,
            bidirected_fraction: 0.2,
            singly_connected: false,
            coefficient_range: (0.1, 2.0),
            variance_range: (0.5, 2.0),
            correlation_range: (0.1, 0.6),
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn with_seed(&self, seed: u64) -> GeneratorConfig {
        GeneratorConfig { seed, ..self.clone() }
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(2..=20).contains(&self.node_count) {
            return bad("node_count must lie in 2..=20");
        }
        for (name, p) in [("edge_density", self.edge_density), ("bidirected_fraction", self.bidirected_fraction)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name} must lie in [0, 1]"));
            }
        }
        for (name, (lo, hi)) in [
            ("coefficient_range", self.coefficient_range),
            ("variance_range", self.variance_range),
            ("correlation_range", self.correlation_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(&format!("{name} is empty"));
            }
        }
        if self.variance_range.0 <= 0.0 {
            return bad("variance_range must be positive");
        }
        if self.correlation_range.1 >= 1.0 {
            return bad("correlation_range must stay below 1");
        }
        Ok(())
    }
}

/// Seed for trial `i` of a sweep seeded with `seed`.
pub fn trial_seed(seed: u64, i: u64) -> u64 {
    splitmix(seed ^ splitmix(i.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn signed(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    let m = if lo == hi { lo } else { rng.random_range(lo..=hi) };
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// `(a, b, directed)` over node positions `0..n`; directed edges point from
/// the earlier to the later node of a random order.
fn skeleton(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Vec<(usize, usize, EdgeKind)> {
    let n = cfg.node_count;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut out = Vec::new();
    if cfg.singly_connected {
        for k in 1..n {
            let (other, me) = (order[rng.random_range(0..k)], order[k]);
            if rng.random_bool(cfg.bidirected_fraction) {
                out.push((other, me, EdgeKind::Bidirected));
            } else if rng.random_bool(0.5) {
                out.push((other, me, EdgeKind::Directed));
            } else {
                out.push((me, other, EdgeKind::Directed));
            }
        }
        return out;
    }
    for i in 0..n {
        for j in i + 1..n {
            if !rng.random_bool(cfg.edge_density) {
                continue;
            }
            let (a, b) = (order[i], order[j]);
            if rng.random_bool(cfg.bidirected_fraction) {
                out.push((a, b, EdgeKind::Bidirected));
            } else {
                out.push((a, b, EdgeKind::Directed));
                // an occasional confounded edge, as in A -> B plus A <-> B
                if rng.random_bool(cfg.bidirected_fraction * 0.25) {
                    out.push((a, b, EdgeKind::Bidirected));
                }
            }
        }
    }
    out
}

fn node_names(n: usize) -> Vec<NodeId> {
    let width = (n.max(2) - 1).to_string().len();
    (0..n).map(|i| NodeId::new(format!("V{i:0width$}")).expect("generated names are identifiers")).collect()
}

/// A random valid diagram, deterministic in `cfg.seed`.
pub fn random_diagram(cfg: &GeneratorConfig) -> Result<PathDiagram> {
    cfg.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let names = node_names(cfg.node_count);
    let shape = skeleton(cfg, &mut rng);
    let coefficients: Vec<f64> = shape.iter().map(|_| signed(&mut rng, cfg.coefficient_range)).collect();
    for _ in 0..MAX_PD_ATTEMPTS {
        let mut variances: Vec<f64> = names.iter().map(|_| uniform(&mut rng, cfg.variance_range)).collect();
        // error covariances are fixed before loading so that loading helps
        let covariances: Vec<f64> = shape
            .iter()
            .map(|&(a, b, _)| signed(&mut rng, cfg.correlation_range) * (variances[a] * variances[b]).sqrt())
            .collect();
        for _ in 0..=LOADING_STEPS {
            let d = assemble(&names, &shape, &coefficients, &covariances, &variances);
            match d.validate().violations.as_slice() {
                [] => return Ok(d),
                [Violation::NotPositiveDefinite { .. }] => {}
                other => return Err(Error::InvalidDiagram(other.to_vec())),
            }
            for v in &mut variances {
                *v += LOADING_STEP;
            }
        }
    }
    Err(Error::GeneratorExhausted(MAX_PD_ATTEMPTS))
}

fn assemble(
    names: &[NodeId],
    shape: &[(usize, usize, EdgeKind)],
    coefficients: &[f64],
    covariances: &[f64],
    variances: &[f64],
) -> PathDiagram {
    let edges = shape
        .iter()
        .enumerate()
        .map(|(k, &(a, b, kind))| match kind {
            EdgeKind::Directed => Edge::directed(names[a].clone(), names[b].clone(), coefficients[k]),
            EdgeKind::Bidirected => Edge::bidirected(names[a].clone(), names[b].clone(), covariances[k]),
        })
        .collect();
    let var_map: BTreeMap<NodeId, f64> = names.iter().cloned().zip(variances.iter().copied()).collect();
    PathDiagram::from_parts(names.iter().cloned(), edges, &var_map)
}

/// Same structure as `d` with fresh parameters: coefficients with magnitude in
/// `coefficient_range`, variances in `variance_range`, error correlations in
/// `correlation_range`, redrawn until `Ω` is positive definite.
pub fn reparameterize(d: &PathDiagram, cfg: &GeneratorConfig, rng: &mut impl Rng) -> Result<PathDiagram> {
    let names = d.names();
    let coefficients: Vec<(NodeId, NodeId, f64)> = d
        .edges()
        .iter()
        .filter(|e| e.kind == EdgeKind::Directed)
        .map(|e| (e.tail.clone(), e.head.clone(), signed(rng, cfg.coefficient_range)))
        .collect();
    for _ in 0..MAX_PD_ATTEMPTS {
        let variances: BTreeMap<NodeId, f64> =
            names.iter().map(|n| (n.clone(), uniform(rng, cfg.variance_range))).collect();
        let mut edges: Vec<Edge> =
            coefficients.iter().map(|(a, b, w)| Edge::directed(a.clone(), b.clone(), *w)).collect();
        for e in d.edges().iter().filter(|e| e.kind == EdgeKind::Bidirected) {
            let rho = signed(rng, cfg.correlation_range);
            edges.push(Edge::bidirected(e.tail.clone(), e.head.clone(), rho * (variances[&e.tail] * variances[&e.head]).sqrt()));
        }
        let out = PathDiagram::from_parts(names.iter().cloned(), edges, &variances);
        if out.is_valid() {
            return Ok(out);
        }
    }
    Err(Error::GeneratorExhausted(MAX_PD_ATTEMPTS))
}

/// `(X, Y, S)` with `X ≠ Y` uniform and `S` uniform over subsets of the rest.
pub fn random_query(d: &PathDiagram, rng: &mut impl Rng) -> (NodeId, NodeId, Vec<NodeId>) {
    let n = d.node_count();
    let x = rng.random_range(0..n);
    let mut y = rng.random_range(0..n - 1);
    if y >= x {
        y += 1;
    }
    let s = (0..n).filter(|&i| i != x && i != y && rng.random_bool(0.5)).map(|i| d.name(i).clone()).collect();
    (d.name(x).clone(), d.name(y).clone(), s)
}

/// One trial's instance: diagram and query, both derived from `seed`.
pub fn random_instance(cfg: &GeneratorConfig, seed: u64) -> Result<(PathDiagram, NodeId, NodeId, Vec<NodeId>)> {
    let d = random_diagram(&cfg.with_seed(seed))?;
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed));
    let (x, y, s) = random_query(&d, &mut rng);
    Ok((d, x, y, s))
}

/// What a factorization run did on one instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Outcome {
    Match { rel_error: f64 },
    Mismatch { value: f64, oracle: f64, rel_error: f64 },
    Inapplicable { kinds: Vec<String> },
    Error { message: String },
}

impl Outcome {
    /// Stable one-word label, used in replay artifacts.
    pub fn label(&self) -> String {
        match self {
            Outcome::Match { .. } => "match".into(),
            Outcome::Mismatch { .. } => "mismatch".into(),
            Outcome::Inapplicable { kinds } => format!("inapplicable:{}", kinds.join(",")),
            Outcome::Error { .. } => "error".into(),
        }
    }
}

/// Relative error, or zero when the two values lie within [`ABS_FLOOR`].
pub fn rel_error(value: f64, oracle: f64) -> f64 {
    let diff = (value - oracle).abs();
    if diff <= ABS_FLOOR {
        0.0
    } else {
        diff / value.abs().max(oracle.abs())
    }
}

pub fn run_factorization<S: AsRef<str>>(d: &PathDiagram, x: &str, y: &str, s: &[S], mode: Mode) -> Outcome {
    match factorize::factorize(d, x, y, s, mode) {
        Err(e) => Outcome::Error { message: e.to_string() },
        Ok(f) => match &f.result {
            None => Outcome::Inapplicable { kinds: f.report.failures.iter().map(|k| k.kind().to_string()).collect() },
            Some(r) => {
                let err = rel_error(r.value, f.oracle);
                if gaussian::approx_eq(r.value, f.oracle, REL_TOL) {
                    Outcome::Match { rel_error: err }
                } else {
                    Outcome::Mismatch { value: r.value, oracle: f.oracle, rel_error: err }
                }
            }
        },
    }
}

/// A failing instance serialized for `replay`: the diagram file with the
/// query and the observed outcome in header comments.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplayArtifact {
    pub diagram: PathDiagram,
    pub x: NodeId,
    pub y: NodeId,
    pub s: Vec<NodeId>,
    pub mode: Mode,
    pub expect: String,
}

impl ReplayArtifact {
    pub fn to_text(&self) -> String {
        let mut out = String::from("# condpath replay artifact\n");
        let s: Vec<&str> = self.s.iter().map(NodeId::as_str).collect();
        let _ = writeln!(out, "# query: {} {}", self.x, self.y);
        let _ = writeln!(out, "# given: {}", s.join(" "));
        let _ = writeln!(out, "# mode: {}", mode_name(self.mode));
        let _ = writeln!(out, "# expect: {}", self.expect);
        out.push_str(&format::format_diagram(&self.diagram));
        out
    }

    pub fn parse(text: &str) -> Result<ReplayArtifact> {
        let mut fields = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if let Some((k, v)) = line.strip_prefix('#').and_then(|r| r.split_once(':')) {
                fields.entry(k.trim().to_string()).or_insert((i + 1, v.trim().to_string()));
            }
        }
        let field = |k: &str| {
            fields.get(k).map(|(_, v)| v.as_str()).ok_or_else(|| Error::Parse { line: 1, message: format!("missing `# {k}:` header") })
        };
        let ids = |s: &str| s.split_whitespace().map(NodeId::new).collect::<Result<Vec<_>>>();
        let query = ids(field("query")?)?;
        let [x, y] = <[NodeId; 2]>::try_from(query)
            .map_err(|_| Error::Parse { line: fields["query"].0, message: "query needs exactly two nodes".into() })?;
        let mode = match field("mode")? {
            "single" => Mode::Single,
            "chain" => Mode::Chain,
            other => return Err(Error::Parse { line: fields["mode"].0, message: format!("unknown mode `{other}`") }),
        };
        Ok(ReplayArtifact {
            diagram: format::parse_diagram(text)?,
            x,
            y,
            s: ids(field("given")?)?,
            mode,
            expect: field("expect")?.to_string(),
        })
    }

    /// Re-runs the recorded query.
    pub fn replay(&self) -> Outcome {
        run_factorization(&self.diagram, self.x.as_str(), self.y.as_str(), &self.s, self.mode)
    }
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Single => "single",
        Mode::Chain => "chain",
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SoundnessStats {
    pub trials: usize,
    /// Trials where no diagram could be drawn.
    pub generator_failures: usize,
    pub applicable: usize,
    pub passed: usize,
    pub mismatches: usize,
    pub inapplicable: usize,
    /// Errors other than inapplicability, such as the path cap.
    pub errors: usize,
    pub failure_kinds: BTreeMap<String, usize>,
    /// Inapplicable with one shared subpath but applicable when chaining.
    pub chain_recovered: usize,
    pub chain_mismatches: usize,
    pub max_rel_error: f64,
    #[serde(skip)]
    pub first_mismatch: Option<ReplayArtifact>,
    #[serde(skip)]
    pub first_inapplicable: Option<ReplayArtifact>,
}

struct SoundnessTrial {
    instance: Option<(PathDiagram, NodeId, NodeId, Vec<NodeId>)>,
    single: Outcome,
    chain: Option<Outcome>,
}

fn soundness_trial(cfg: &GeneratorConfig, i: usize) -> SoundnessTrial {
    let (d, x, y, s) = match random_instance(cfg, trial_seed(cfg.seed, i as u64)) {
        Ok(inst) => inst,
        Err(e) => return SoundnessTrial { instance: None, single: Outcome::Error { message: e.to_string() }, chain: None },
    };
    let single = run_factorization(&d, x.as_str(), y.as_str(), &s, Mode::Single);
    let chain = matches!(single, Outcome::Inapplicable { .. })
        .then(|| run_factorization(&d, x.as_str(), y.as_str(), &s, Mode::Chain));
    SoundnessTrial { instance: Some((d, x, y, s)), single, chain }
}

/// Factorizes `trials` random instances in single mode, retrying
/// inapplicable ones in chain mode.
pub fn sweep_soundness(cfg: &GeneratorConfig, trials: usize) -> Result<SoundnessStats> {
    cfg.check()?;
    let runs: Vec<SoundnessTrial> = (0..trials).into_par_iter().map(|i| soundness_trial(cfg, i)).collect();
    let mut st = SoundnessStats { trials, ..Default::default() };
    for run in runs {
        let Some((d, x, y, s)) = run.instance else {
            st.generator_failures += 1;
            continue;
        };
        let artifact = |mode: Mode, outcome: &Outcome| ReplayArtifact {
            diagram: d.clone(),
            x: x.clone(),
            y: y.clone(),
            s: s.clone(),
            mode,
            expect: outcome.label(),
        };
        match &run.single {
            Outcome::Match { rel_error } => {
                st.applicable += 1;
                st.passed += 1;
                st.max_rel_error = st.max_rel_error.max(*rel_error);
            }
            Outcome::Mismatch { rel_error, .. } => {
                st.applicable += 1;
                st.mismatches += 1;
                st.max_rel_error = st.max_rel_error.max(*rel_error);
                st.first_mismatch.get_or_insert_with(|| artifact(Mode::Single, &run.single));
            }
            Outcome::Inapplicable { kinds } => {
                st.inapplicable += 1;
                for k in kinds.iter().collect::<BTreeSet<_>>() {
                    *st.failure_kinds.entry(k.clone()).or_default() += 1;
                }
                st.first_inapplicable.get_or_insert_with(|| artifact(Mode::Single, &run.single));
            }
            Outcome::Error { .. } => st.errors += 1,
        }
        match &run.chain {
            Some(Outcome::Match { .. }) => st.chain_recovered += 1,
            Some(o @ Outcome::Mismatch { .. }) => {
                st.chain_recovered += 1;
                st.chain_mismatches += 1;
                st.first_mismatch.get_or_insert_with(|| artifact(Mode::Chain, o));
            }
            _ => {}
        }
    }
    Ok(st)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SimpsonStats {
    pub trials: usize,
    pub generator_failures: usize,
    pub applicable: usize,
    pub inapplicable: usize,
    /// Applicable instances where `β_{YX·S}` and `β_YX` have opposite signs.
    pub reversals: usize,
    /// Applicable instances where exactly one of `σ_XY`, `σ_{XY·S}` is zero.
    pub vanishing: usize,
    /// Applicable instances whose `σ_{XY·S}` sign differs from the sign of
    /// `σ_XY` in the conditioned diagram.
    pub conditioned_sign_mismatches: usize,
    #[serde(skip)]
    pub first_reversal: Option<ReplayArtifact>,
}

/// Sign behaviour of a single applicable instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SignCase {
    Inapplicable,
    Same { conditioned_agrees: bool },
    Vanishing { conditioned_agrees: bool },
    Reversal { conditioned_agrees: bool },
}

fn sign_case(d: &PathDiagram, x: &str, y: &str, s: &[NodeId]) -> Result<SignCase> {
    let f = factorize::factorized_partial_covariance(d, x, y, s)?;
    let Some(r) = &f.result else {
        return Ok(SignCase::Inapplicable);
    };
    let sigma = gaussian::implied_covariance(d)?;
    let (ox, oy) = (d.index_of(x)?, d.index_of(y)?);
    let scale = (sigma.get(ox, ox) * sigma.get(oy, oy)).sqrt();
    let before = factorize::sign_with_tol(sigma.get(ox, oy), scale);
    let after = factorize::sign_with_tol(f.oracle, scale);
    let conditioned_agrees = factorize::sign_with_tol(r.base, scale) == after || r.terms.is_empty() && after == 0;
    Ok(if before == after {
        SignCase::Same { conditioned_agrees }
    } else if before == 0 || after == 0 {
        SignCase::Vanishing { conditioned_agrees }
    } else {
        SignCase::Reversal { conditioned_agrees }
    })
}

/// Counts sign reversals of the regression coefficient on applicable random
/// instances. Partial variances are positive, so the sign of `β_{YX·S}` is
/// the sign of `σ_{XY·S}`.
pub fn sweep_simpson(cfg: &GeneratorConfig, trials: usize) -> Result<SimpsonStats> {
    cfg.check()?;
    let runs: Vec<Option<(PathDiagram, NodeId, NodeId, Vec<NodeId>, Result<SignCase>)>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let (d, x, y, s) = random_instance(cfg, trial_seed(cfg.seed, i as u64)).ok()?;
            let case = sign_case(&d, x.as_str(), y.as_str(), &s);
            Some((d, x, y, s, case))
        })
        .collect();
    let mut st = SimpsonStats { trials, ..Default::default() };
    for run in runs {
        let Some((d, x, y, s, case)) = run else {
            st.generator_failures += 1;
            continue;
        };
        let agrees = match case {
            Ok(SignCase::Inapplicable) | Err(_) => {
                st.inapplicable += 1;
                continue;
            }
            Ok(SignCase::Same { conditioned_agrees }) => conditioned_agrees,
            Ok(SignCase::Vanishing { conditioned_agrees }) => {
                st.vanishing += 1;
                conditioned_agrees
            }
            Ok(SignCase::Reversal { conditioned_agrees }) => {
                st.reversals += 1;
                st.first_reversal.get_or_insert_with(|| ReplayArtifact {
                    diagram: d.clone(),
                    x: x.clone(),
                    y: y.clone(),
                    s: s.clone(),
                    mode: Mode::Single,
                    expect: "reversal".into(),
                });
                conditioned_agrees
            }
        };
        st.applicable += 1;
        if !agrees {
            st.conditioned_sign_mismatches += 1;
        }
    }
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(n: usize, seed: u64) -> GeneratorConfig {
        GeneratorConfig { node_count: n, singly_connected: true, seed, ..Default::default() }
    }

    #[test]
    fn tree_has_n_minus_one_edges() {
        let d = random_diagram(&tree(6, 1)).unwrap();
        assert_eq!(d.edges().len(), 5);
        assert!(d.is_singly_connected());
    }

    #[test]
    fn deterministic_in_seed() {
        let cfg = GeneratorConfig { node_count: 9, seed: 42, ..Default::default() };
        assert_eq!(random_diagram(&cfg).unwrap(), random_diagram(&cfg).unwrap());
        assert_ne!(random_diagram(&cfg).unwrap(), random_diagram(&cfg.with_seed(43)).unwrap());
    }

    #[test]
    fn draws_are_valid() {
        let cfg = GeneratorConfig { node_count: 8, edge_density: 0.6, bidirected_fraction: 0.5, ..Default::default() };
        for seed in 0..200 {
            assert!(random_diagram(&cfg.with_seed(seed)).unwrap().is_valid());
        }
    }

    #[test]
    fn bad_config() {
        for cfg in [
            GeneratorConfig { node_count: 1, ..Default::default() },
            GeneratorConfig { node_count: 21, ..Default::default() },
            GeneratorConfig { edge_density: 1.5, ..Default::default() },
            GeneratorConfig { variance_range: (2.0, 1.0), ..Default::default() },
        ] {
            assert!(matches!(random_diagram(&cfg), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn zero_trials() {
        let st = sweep_soundness(&GeneratorConfig::default(), 0).unwrap();
        assert_eq!(st, SoundnessStats::default());
        assert_eq!(sweep_simpson(&GeneratorConfig::default(), 0).unwrap(), SimpsonStats::default());
    }

    #[test]
    fn sweeps_are_reproducible() {
        let cfg = GeneratorConfig { node_count: 7, seed: 5, ..Default::default() };
        assert_eq!(sweep_soundness(&cfg, 40).unwrap(), sweep_soundness(&cfg, 40).unwrap());
    }

    #[test]
    fn artifact_round_trip() {
        let (d, x, y, s) = random_instance(&GeneratorConfig::default(), 3).unwrap();
        let a = ReplayArtifact { diagram: d, x, y, s, mode: Mode::Chain, expect: "match".into() };
        assert_eq!(ReplayArtifact::parse(&a.to_text()).unwrap(), a);
        let empty = ReplayArtifact { s: Vec::new(), ..a };
        assert_eq!(ReplayArtifact::parse(&empty.to_text()).unwrap(), empty);
    }
}
