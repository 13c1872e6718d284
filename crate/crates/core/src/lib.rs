//! Path diagrams, open paths and routes, and factorizations of partial
//! covariances along chains of conditioning sets.

pub mod conditioning;
pub mod diagram;
pub mod error;
pub mod factorize;
pub mod fixtures;
pub mod format;
pub mod gaussian;
pub mod harness;
mod linalg;
pub mod separation;
pub mod simpson;

pub use diagram::{DiagramBuilder, Edge, EdgeKind, Link, NodeId, PathDiagram, ValidationReport, Violation};
pub use error::{Error, Result};
pub use separation::{m_separated, Walk};
