//! Sublinear core-set construction and two-pass streaming approximation for
//! MaxCut and max-agreement correlation clustering.
//!
//! The pipeline: score vertices by importance, sample a weighted vertex
//! core-set, sparsify its edges, and estimate the objective either with
//! exact/local-search solvers or with the seed-set LP estimator. The
//! streaming variant builds the same core-set in two passes over an
//! insert/delete edge stream using a CountMin sketch and a bank of l1
//! samplers.

pub mod estimate;
pub mod graph;
pub mod hash;
pub mod lp;
pub mod pipeline;
pub mod sampling;
pub mod sketch;
pub mod solvers;
pub mod streaming;
pub mod verify;

pub use graph::{Graph, SignedGraph, StreamEvent};
pub use sampling::{CoresetGraph, ImportanceParams, LogBase, Problem, SignedCoresetGraph};
