//! Entanglement distribution over time-varying LEO satellite constellations.
//!
//! The crate propagates a Walker constellation, discretises its changing
//! connectivity into snapshots, builds a weighted space-time graph, routes
//! utility-optimal entanglement paths inside a memory-coherence horizon and
//! executes nested or segmented entanglement swapping, either in closed form
//! or by seeded Monte Carlo.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod linkphys;
pub mod numeric;
pub mod orbit;
pub mod protocol;
pub mod router;
pub mod simkit;
pub mod spacetime;

pub use error::{Error, Result};
