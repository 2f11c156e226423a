//! Clustering and shape fitting over stochastic point sets.
//!
//! The crate evaluates the expected k-center and j-flat-center objectives in
//! the existential and locational uncertainty models, builds additive coresets
//! of realizations and the probability mass of each coreset class, constructs
//! generalized k-median coresets, and solves the resulting problems. Brute-force
//! reference implementations live in [`oracle`].

pub mod convex;
pub mod error;
pub mod exec;
pub mod gkm;
pub mod grid_coreset;
pub mod io;
pub mod jflat;
pub mod model;
pub mod objective;
pub mod oracle;
pub mod partition_prob;

pub use error::{Error, Result};
pub use exec::Exec;
