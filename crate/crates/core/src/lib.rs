//! Deterministic approximate counting for log-concave symmetric Boolean
//! Holant problems, with an exact brute-force oracle for cross-checking.

pub mod counter;
pub mod coupling;
pub mod estimator;
pub mod fixtures;
pub mod graph;
pub mod holant;
pub mod io;
pub mod lp;
pub mod oracle;
pub mod rational;
pub mod tree;
pub mod verify;

pub use graph::{Edge, EdgeId, EdgeKind, Graph, GraphError, VertexId};
pub use holant::{HolantError, HolantInstance, PartialAssignment, Signature};
pub use rational::Rational;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/instances.md")]
    mod instances {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/coupling-trees.md")]
    mod coupling_trees {}
    #[doc = include_str!("../../../book/src/lp.md")]
    mod lp {}
    #[doc = include_str!("../../../book/src/counting.md")]
    mod counting {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
