//! Simulation lab for self-organizing overlay topologies.
//!
//! Two distributed rewiring protocols sit on top of a small simple-graph
//! store:
//!
//! - [`anneal`]: gossip-driven thermal rewiring where a link between `v`
//!   and `w` survives with Fermi probability `1 / (1 + exp((e - mu) / T))`;
//! - [`rewire`]: edge relocation through two consecutive Metropolis-Hastings
//!   biased random walks, which drives the topology towards a scale-free
//!   ensemble with a chosen exponent `gamma`.
//!
//! The measurement side covers random-graph theory ([`ensemble`]),
//! spectra and the dynamics they govern ([`spectral`]), power-law fitting
//! ([`fit`]) and failure/attack experiments ([`resilience`]). [`harness`]
//! binds everything into seeded, reproducible experiment runs that write
//! CSV/JSON data files.

// `!(x > 0.0)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod graph;
pub mod rng;
pub mod stats;

pub mod anneal;
pub mod ensemble;
pub mod fit;
pub mod harness;
pub mod resilience;
pub mod rewire;
pub mod spectral;

pub use error::{GraphError, ModelError};
pub use graph::{ComponentReport, Diameter, Graph};
