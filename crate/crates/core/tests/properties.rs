mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use condpath::conditioning::condition_with_variance;
use condpath::factorize::factorized_partial_covariance;
use condpath::format::{format_diagram, parse_diagram};
use condpath::gaussian::{self, implied_covariance, lemma_aux1_update, lemma_aux2_update, lemma_aux3_update, premises};
use condpath::separation::{enumerate_open_paths, EdgeKey, find_open_route, m_separated, path_to_route, route_is_open, route_to_path};
use condpath::{NodeId, PathDiagram, Walk};

const REL: f64 = 1e-9;

fn name(i: usize) -> String {
    format!("N{i}")
}

/// Diagrams on up to `max` nodes whose directed edges follow the node order,
/// so every draw is acyclic; draws that are not positive definite are dropped.
fn diagram(max: usize) -> impl Strategy<Value = PathDiagram> {
    (2..=max)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (Just(n), prop::collection::vec((0u8..6, -1.5f64..1.5, -0.4f64..0.4), pairs), prop::collection::vec(0.3f64..2.0, n))
        })
        .prop_filter_map("not positive definite", |(n, pairs, variances)| {
            let mut b = PathDiagram::builder();
            for (i, v) in variances.iter().enumerate() {
                b = b.variance(&name(i), *v);
            }
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    let (kind, coef, cov) = pairs[k];
                    k += 1;
                    // kinds 0-2 leave the pair unjoined, so sparse draws are common
                    if kind == 3 || kind == 5 {
                        b = b.directed(&name(i), &name(j), coef);
                    }
                    if kind == 4 || kind == 5 {
                        b = b.bidirected(&name(i), &name(j), cov);
                    }
                }
            }
            b.build().ok().filter(PathDiagram::is_valid)
        })
}

#[derive(Debug, Clone)]
struct Query {
    d: PathDiagram,
    x: usize,
    y: usize,
    z: Vec<usize>,
}

impl Query {
    fn names(&self) -> Vec<NodeId> {
        self.z.iter().map(|&v| self.d.name(v).clone()).collect()
    }
}

fn query(max: usize) -> impl Strategy<Value = Query> {
    (diagram(max), any::<usize>(), any::<usize>(), any::<u32>()).prop_map(|(d, a, b, bits)| {
        let n = d.node_count();
        let x = a % n;
        let y = (x + 1 + b % (n - 1)) % n;
        let z = (0..n).filter(|&v| v != x && v != y && bits & (1 << v) != 0).collect();
        Query { d, x, y, z }
    })
}

fn edges(w: &Walk) -> BTreeSet<EdgeKey> {
    w.edges().into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn wright_total_is_the_implied_covariance(d in diagram(6)) {
        let sigma = common::sigma(&d);
        let n = d.node_count();
        for x in 0..n {
            for y in x + 1..n {
                let w = gaussian::wright_covariance(&d, x, y).unwrap();
                prop_assert!(common::close(w.total, sigma[(x, y)], REL), "{} vs {}", w.total, sigma[(x, y)]);
            }
        }
    }

    #[test]
    fn one_step_schur_update(q in query(7), pick in any::<usize>()) {
        let s = implied_covariance(&q.d).unwrap();
        let oracle = common::sigma(&q.d);
        let got = s.partial_covariance(q.x, q.y, &q.z).unwrap();
        prop_assert!(common::close(got, common::pcov(&oracle, q.x, q.y, &q.z), REL));
        if let Some((&w, rest)) = q.z.split_first().filter(|_| pick % 2 == 0) {
            let step = s.partial_covariance(q.x, q.y, rest).unwrap()
                - s.partial_covariance(q.x, w, rest).unwrap() * s.partial_covariance(w, q.y, rest).unwrap()
                    / s.partial_variance(w, rest).unwrap();
            prop_assert!(common::close(got, step, 1e-8));
        }
    }

    #[test]
    fn separation_implies_zero_partial_covariance(q in query(7)) {
        if m_separated(&q.d, q.x, q.y, &q.z).unwrap() {
            let sigma = common::sigma(&q.d);
            let scale = (sigma[(q.x, q.x)] * sigma[(q.y, q.y)]).sqrt();
            prop_assert!(common::pcov(&sigma, q.x, q.y, &q.z).abs() <= 1e-9 * scale);
        }
        prop_assert_eq!(!m_separated(&q.d, q.x, q.y, &q.z).unwrap(), common::connected(&q.d, q.x, q.y, &q.z));
    }

    #[test]
    fn open_routes_and_open_paths_correspond(q in query(7)) {
        let route = find_open_route(&q.d, q.x, q.y, &q.z).unwrap();
        let paths = enumerate_open_paths(&q.d, q.x, q.y, &q.z, 100_000).unwrap();
        prop_assert_eq!(route.is_some(), !paths.is_empty());
        if let Some(r) = route {
            let p = route_to_path(&q.d, &r, &q.z).unwrap();
            prop_assert!(p.is_path());
            prop_assert!(paths.contains(&p));
            prop_assert!(edges(&p).is_subset(&edges(&r)));
        }
        for p in paths.iter().take(5) {
            let r = path_to_route(&q.d, p, &q.z).unwrap();
            prop_assert!(route_is_open(&q.d, &r, &q.z).unwrap().open);
            prop_assert!(edges(p).is_subset(&edges(&r)));
        }
    }

    #[test]
    fn update_identities_hold_under_their_premises(q in query(7), pick in any::<(usize, usize)>()) {
        let n = q.d.node_count();
        let free: Vec<usize> = (0..n).filter(|v| *v != q.x && *v != q.y && !q.z.contains(v)).collect();
        prop_assume!(!free.is_empty());
        let w = free[pick.0 % free.len()];
        let r = [q.x, q.y].into_iter().chain(q.z.iter().copied()).nth(pick.1 % (2 + q.z.len())).unwrap();
        let z: Vec<usize> = q.z.iter().copied().filter(|&v| v != r || r == q.x || r == q.y).collect();
        let s = implied_covariance(&q.d).unwrap();
        let mut zw = z.clone();
        zw.push(w);
        let target = common::pcov(&common::sigma(&q.d), q.x, q.y, &zw);
        if r != w && premises::aux1(&q.d, q.x, q.y, r, w, &z).unwrap() {
            prop_assert!(common::close(lemma_aux1_update(&s, q.x, q.y, r, w, &z).unwrap(), target, REL));
        }
        if premises::aux2(&q.d, q.x, q.y, w, &z).unwrap() {
            prop_assert!(common::close(lemma_aux2_update(&s, q.x, q.y, w, &z).unwrap(), target, REL));
        }
        if premises::aux3(&q.d, q.x, q.y, w, &z).unwrap() {
            prop_assert!(common::close(lemma_aux3_update(&s, q.x, q.y, w, &z).unwrap(), target, REL));
        }
    }

    #[test]
    fn conditioning_preserves_partial_covariance(q in query(7), v in 0.2f64..5.0) {
        let s = q.names();
        let original = common::pcov(&common::sigma(&q.d), q.x, q.y, &q.z);
        let on = |variance: f64| {
            let cd = condition_with_variance(&q.d, &s, variance).unwrap();
            let c = &cd.diagram;
            let (x, y) = (c.index_of(q.d.name(q.x).as_str()).unwrap(), c.index_of(q.d.name(q.y).as_str()).unwrap());
            common::pcov(&common::sigma(c), x, y, &cd.z())
        };
        let (one, other) = (on(1.0), on(v));
        prop_assert!(common::close(original, one, REL), "{original} vs {one}");
        prop_assert!(common::close(one, other, 1e-10));
    }

    #[test]
    fn applicable_factorizations_match_with_shrinking_ratios(q in query(7)) {
        let s = q.names();
        let f = factorized_partial_covariance(&q.d, q.d.name(q.x).as_str(), q.d.name(q.y).as_str(), &s).unwrap();
        if let Some(r) = &f.result {
            prop_assert!(common::close(r.value, f.oracle, REL), "{} vs {}", r.value, f.oracle);
            for t in &r.terms {
                prop_assert!(t.ratio > 0.0 && t.ratio <= 1.0 + 1e-12, "ratio {}", t.ratio);
            }
        } else {
            prop_assert!(!f.report.failures.is_empty());
        }
    }

    #[test]
    fn text_format_round_trips(d in diagram(6)) {
        let text = format_diagram(&d);
        let back = parse_diagram(&text).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(format_diagram(&back), text);
    }
}
