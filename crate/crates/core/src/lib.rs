//! Statistical shape analysis of elastic graphs.
//!
//! An elastic graph is a network whose edges are Euclidean curves. This crate
//! compares such graphs under an elastic metric on edge shapes, registers
//! their nodes by graph matching, and builds population summaries (Karcher
//! means, tangent PCA) and hypothesis tests on top of the resulting distances.

pub mod curve;
pub mod error;
pub mod graph;
pub mod inference;
pub mod io;
pub mod matching;
pub mod statistics;

pub use curve::{Curve, Reparam, Rotation, Srvf};
pub use error::{Error, ErrorKind, Result};
pub use graph::{GraphGeodesic, GraphShape, Permutation};
pub use inference::{DistanceMatrix, TestReport};
pub use matching::{MatchConfig, MatchResult, Solver};
