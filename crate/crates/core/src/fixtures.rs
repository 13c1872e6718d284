//! Small worked diagrams shared by tests, benchmarks and the CLI examples.
//!
//! Coefficients are arbitrary but fixed; every diagram is valid.

use crate::diagram::PathDiagram;

/// A query `σ_{XY·S}` on a diagram.
#[derive(Clone, Debug)]
pub struct Example {
    pub diagram: PathDiagram,
    pub x: &'static str,
    pub y: &'static str,
    pub s: Vec<&'static str>,
}

/// `X -> Y -> Z` with coefficients `alpha`, `delta` and unit error variances.
pub fn chain(alpha: f64, delta: f64) -> Example {
    let diagram = PathDiagram::builder()
        .directed("X", "Y", alpha)
        .directed("Y", "Z", delta)
        .build()
        .unwrap();
    Example { diagram, x: "X", y: "Y", s: vec!["Z"] }
}

/// A node `A` with two parents, two spouses and two children `B`, `C`.
pub fn hub() -> PathDiagram {
    PathDiagram::builder()
        .directed("P1", "A", 0.6)
        .directed("P2", "A", -0.4)
        .bidirected("A", "Q1", 0.3)
        .bidirected("A", "Q2", -0.2)
        .directed("A", "B", 0.8)
        .directed("A", "C", 1.1)
        .build()
        .unwrap()
}

/// Shared subpath `X2 <- X1 -> X3` rooted at `X1`; conditioning on `{C, D, E}`
/// splits `C` and `E`.
pub fn rooted_spine() -> Example {
    let diagram = PathDiagram::builder()
        .directed("X1", "X2", 0.9)
        .directed("X2", "X", 0.7)
        .directed("X1", "X3", 0.8)
        .directed("X3", "Y", 1.1)
        .directed("A", "X", 0.5)
        .directed("X2", "A", 0.6)
        .directed("X2", "B", -0.4)
        .directed("B", "X", 0.3)
        .bidirected("X3", "F", 0.25)
        .bidirected("F", "E", 0.2)
        .directed("C", "X1", 0.7)
        .directed("C", "X2", 0.5)
        .directed("X1", "D", 0.6)
        .directed("E", "D", -0.8)
        .directed("X3", "E", 0.4)
        .directed("X3", "G", 0.9)
        .directed("G", "Y", 0.6)
        .build()
        .unwrap();
    Example { diagram, x: "X", y: "Y", s: vec!["C", "D", "E"] }
}

/// Shared subpath `X1 -> X2 -> X3` entered through three different arrowheads.
pub fn entered_spine() -> Example {
    let diagram = PathDiagram::builder()
        .directed("X", "X1", 0.8)
        .directed("X1", "X2", 0.9)
        .directed("X2", "X3", 0.7)
        .directed("X3", "Y", 1.2)
        .directed("A", "X", 0.6)
        .bidirected("A", "X1", 0.3)
        .directed("B", "X1", 0.5)
        .directed("X", "B", -0.7)
        .directed("C", "X1", 0.4)
        .directed("C", "X2", 0.6)
        .directed("E", "X2", -0.5)
        .directed("E", "X3", 0.8)
        .directed("D", "E", 0.9)
        .directed("D", "Y", 0.4)
        .directed("X3", "F", 0.6)
        .directed("F", "Y", 0.7)
        .build()
        .unwrap();
    Example { diagram, x: "X", y: "Y", s: vec!["C", "D"] }
}

/// Two open paths sharing `X1 -> X2` and `X3 -> X4` but not `X2 … X3`.
pub fn two_segments() -> Example {
    let diagram = PathDiagram::builder()
        .directed("X1", "X2", 0.8)
        .directed("X2", "X3", 0.6)
        .directed("X3", "X4", 0.9)
        .directed("X1", "A", 0.7)
        .directed("A", "X2", 0.5)
        .directed("X2", "C", 0.4)
        .directed("C", "X3", 0.8)
        .directed("B", "X3", -0.6)
        .directed("B", "X4", 0.5)
        .directed("X4", "D", 0.7)
        .build()
        .unwrap();
    Example { diagram, x: "X1", y: "X4", s: vec!["A", "B", "D"] }
}

/// `R` is the root of `X <- R -> Y` but not of `X <-> R -> Y`.
pub fn mixed_role() -> Example {
    let diagram = PathDiagram::builder()
        .directed("R", "S", 0.8)
        .directed("R", "Y", 0.9)
        .directed("R", "X", 0.7)
        .bidirected("R", "X", 0.3)
        .build()
        .unwrap();
    Example { diagram, x: "X", y: "Y", s: vec!["S"] }
}

/// `S` is both a child and a spouse of `R` on `X -> R -> Y`.
pub fn child_and_spouse() -> Example {
    let diagram = PathDiagram::builder()
        .directed("X", "R", 0.8)
        .directed("R", "Y", 0.9)
        .directed("R", "S", 0.7)
        .bidirected("R", "S", 0.3)
        .build()
        .unwrap();
    Example { diagram, x: "X", y: "Y", s: vec!["S"] }
}

/// `X -> Y <- S -> X`, where conditioning on `S` can flip the sign of `σ_XY`.
pub fn confounded(xy: f64, sx: f64, sy: f64) -> Example {
    let diagram = PathDiagram::builder()
        .directed("X", "Y", xy)
        .directed("S", "X", sx)
        .directed("S", "Y", sy)
        .build()
        .unwrap();
    Example { diagram, x: "X", y: "Y", s: vec!["S"] }
}

/// Every example above, by name.
pub fn all() -> Vec<(&'static str, Example)> {
    vec![
        ("chain", chain(1.0, 1.0)),
        ("rooted-spine", rooted_spine()),
        ("entered-spine", entered_spine()),
        ("two-segments", two_segments()),
        ("mixed-role", mixed_role()),
        ("child-and-spouse", child_and_spouse()),
        ("confounded", confounded(1.0, 1.0, -2.0)),
    ]
}
