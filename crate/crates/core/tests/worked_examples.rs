use condpath::conditioning::{condition, equivalence_check};
use condpath::factorize::{
    chained_factorization, factorized_partial_covariance, Attachment, Failure, TheoremUsed, Variant,
};
use condpath::fixtures;
use condpath::gaussian::{approx_eq, implied_covariance, REL_TOL};
use condpath::NodeId;

fn names(v: &[NodeId]) -> Vec<&str> {
    v.iter().map(NodeId::as_str).collect()
}

#[test]
fn rooted_spine_factorization() {
    let ex = fixtures::rooted_spine();
    let cd = condition(&ex.diagram, &ex.s).unwrap();
    let sp: Vec<&str> = cd.s_prime.iter().map(NodeId::as_str).collect();
    assert_eq!(sp, ["C__X1", "C__X2", "E__D"]);

    let f = factorized_partial_covariance(&ex.diagram, ex.x, ex.y, &ex.s).unwrap();
    assert!(f.is_applicable(), "{:?}", f.report);
    assert_eq!(f.paths.len(), 6);
    let spine = f.spine.as_ref().unwrap();
    assert_eq!(names(&spine.nodes), ["X1", "X2", "X3"]);
    assert_eq!((spine.m, spine.n, spine.variant), (2, 1, Variant::Root));
    assert!(f.reentrancy.iter().all(|r| r.route.is_none()));

    let p = f.partition.as_ref().unwrap();
    let upper: Vec<Vec<&str>> = p.z_upper.iter().map(|s| names(s)).collect();
    let lower: Vec<Vec<&str>> = p.z_lower.iter().map(|s| names(s)).collect();
    assert_eq!(upper, [vec!["C__X1"], vec!["C__X2"], vec![]]);
    assert_eq!(lower, [vec!["D", "E__D"], vec![], vec!["E"]]);
    // C loses every edge when conditioned on and is trivially separable.
    assert_eq!(names(&p.leftovers), ["C"]);

    let r = f.result.as_ref().unwrap();
    assert_eq!(r.theorem_used, Some(TheoremUsed::Root));
    let sets: Vec<(Vec<&str>, Vec<&str>)> =
        r.terms.iter().map(|t| (names(&t.numerator_set), names(&t.denominator_set))).collect();
    assert_eq!(
        sets,
        [
            (vec!["C__X1", "D", "E__D"], vec![]),
            (vec!["C__X1", "C__X2", "D", "E__D"], vec!["C__X1", "C__X2", "D", "E__D"]),
            (vec!["C__X1", "C__X2", "D", "E", "E__D"], vec!["C__X1", "C__X2", "D", "E__D"]),
        ]
    );
    assert!(approx_eq(r.terms[1].ratio, 1.0, REL_TOL));
    assert!(f.matches_oracle().unwrap(), "{} vs {}", r.value, f.oracle);
}

#[test]
fn entered_spine_has_unit_ratios() {
    let ex = fixtures::entered_spine();
    let f = factorized_partial_covariance(&ex.diagram, ex.x, ex.y, &ex.s).unwrap();
    assert!(f.is_applicable(), "{:?}", f.report);
    let spine = f.spine.as_ref().unwrap();
    assert_eq!(names(&spine.nodes), ["X1", "X2", "X3"]);
    assert_eq!(spine.variant, Variant::Nonroot);
    assert_eq!(spine.attachment, Some(Attachment::Arrowhead));
    let p = f.partition.as_ref().unwrap();
    let upper: Vec<Vec<&str>> = p.z_upper.iter().map(|s| names(s)).collect();
    assert_eq!(upper, [vec!["C__X1"], vec!["C__X2", "D__E"], vec![]]);
    assert!(p.z_lower.iter().all(Vec::is_empty));
    let r = f.result.as_ref().unwrap();
    assert_eq!(r.theorem_used, Some(TheoremUsed::Nonroot));
    for t in &r.terms {
        assert_eq!(t.numerator_set, t.denominator_set);
        assert_eq!(t.ratio, 1.0);
    }
    assert!(approx_eq(r.value, r.base, REL_TOL));
    assert!(f.matches_oracle().unwrap());
}

#[test]
fn two_segments_need_chaining() {
    let ex = fixtures::two_segments();
    let single = factorized_partial_covariance(&ex.diagram, ex.x, ex.y, &ex.s).unwrap();
    assert_eq!(single.paths.len(), 2);
    assert!(!single.is_applicable());
    assert!(matches!(
        &single.report.failures[..],
        [Failure::UnpartitionableLeftover { nodes }] if names(nodes) == ["D"]
    ));

    let f = chained_factorization(&ex.diagram, ex.x, ex.y, &ex.s).unwrap();
    assert!(f.is_applicable(), "{:?}", f.report);
    let spine = f.spine.as_ref().unwrap();
    assert_eq!(names(&spine.nodes), ["X1", "X2", "X3", "X4"]);
    let p = f.partition.as_ref().unwrap();
    let upper: Vec<Vec<&str>> = p.z_upper.iter().map(|s| names(s)).collect();
    let lower: Vec<Vec<&str>> = p.z_lower.iter().map(|s| names(s)).collect();
    assert_eq!(upper, [vec![], vec!["A__X2"], vec!["B__X3"], vec!["B__X4"]]);
    assert_eq!(lower, [vec!["A"], vec![], vec![], vec!["D"]]);
    let r = f.result.as_ref().unwrap();
    assert_eq!(r.theorem_used, Some(TheoremUsed::Chained));
    assert_eq!(names(&r.terms[0].numerator_set), ["A"]);
    assert!(r.terms[0].denominator_set.is_empty());
    assert_eq!(r.terms[1].ratio, 1.0);
    assert_eq!(r.terms[2].ratio, 1.0);
    assert_eq!(names(&r.terms[3].numerator_set), ["A", "A__X2", "B__X3", "B__X4", "D"]);
    assert_eq!(names(&r.terms[3].denominator_set), ["A", "A__X2", "B__X3", "B__X4"]);
    assert!(f.matches_oracle().unwrap());
}

#[test]
fn mixed_role_is_rejected() {
    let ex = fixtures::mixed_role();
    let f = factorized_partial_covariance(&ex.diagram, ex.x, ex.y, &ex.s).unwrap();
    assert!(matches!(&f.report.failures[..], [Failure::MixedRootRole { node }] if node.as_str() == "R"));
}

#[test]
fn child_and_spouse_is_rejected() {
    let ex = fixtures::child_and_spouse();
    let f = factorized_partial_covariance(&ex.diagram, ex.x, ex.y, &ex.s).unwrap();
    assert!(!f.is_applicable());
    match &f.report.failures[0] {
        Failure::ReentrantRoute { index, node, route } => {
            assert_eq!((*index, node.as_str()), (2, "R"));
            assert_eq!(route, "R -> S <-> R");
        }
        other => panic!("unexpected failure {other:?}"),
    }
}

#[test]
fn chain_single_ratio() {
    let ex = fixtures::chain(1.0, 1.0);
    let f = factorized_partial_covariance(&ex.diagram, ex.x, ex.y, &ex.s).unwrap();
    let r = f.result.unwrap();
    assert!(approx_eq(r.value, 1.0 / 3.0, REL_TOL));
    let sigma = implied_covariance(&ex.diagram).unwrap();
    // σ_XY σ²_{Y·Z} / σ²_Y
    let direct = sigma.get(0, 1) * sigma.partial_variance(1, &[2]).unwrap() / sigma.get(1, 1);
    assert!(approx_eq(r.value, direct, REL_TOL));
}

#[test]
fn conditioning_preserves_partial_covariances() {
    for (name, ex) in fixtures::all() {
        let cd = condition(&ex.diagram, &ex.s).unwrap();
        let r = equivalence_check(&cd, ex.x, ex.y).unwrap();
        assert!(r.agree, "{name}: {r:?}");
    }
}

#[test]
fn chain_mode_with_one_segment_matches_single() {
    for ex in [fixtures::rooted_spine(), fixtures::entered_spine(), fixtures::chain(0.5, 2.0)] {
        let a = factorized_partial_covariance(&ex.diagram, ex.x, ex.y, &ex.s).unwrap();
        let b = chained_factorization(&ex.diagram, ex.x, ex.y, &ex.s).unwrap();
        assert_eq!(a.result, b.result);
    }
}
