//! Deterministic graph-algorithms toolkit: pairwise-independent sample
//! spaces with conditional-expectation bit fixing, a weighted hitting-set
//! solver, delay-based low-diameter network decomposition, and two
//! downstream applications (multiplicative spanners and source-restricted
//! approximate distance oracles), plus brute-force verification at small
//! scale.
//!
//! All algorithmic stages are fully deterministic; random seeds appear
//! only in the input generators.

pub mod cluster;
pub mod delay;
pub mod densify;
pub mod error;
pub mod exact;
pub mod gen;
pub mod graph;
pub mod hitting;
pub mod isolation;
pub mod pairwise;

pub use error::{Error, Result};
pub use graph::{DistanceMap, Graph};
