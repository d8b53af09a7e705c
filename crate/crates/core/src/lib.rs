//! Exponential first-passage percolation on the square lattice.
//!
//! The passage time from the origin can be generated three ways that must
//! agree in law: Eden growth (uniform boundary edge, exponential holding
//! time with rate equal to the boundary count), Dijkstra over lazily drawn
//! Exp(1) edge weights, and Richardson growth with all clocks restarted
//! after each crossing. On top of these sit the conditional-moment
//! statistics, scaling fits, and a CLI that farms replicates
//! deterministically.

pub mod analysis;
pub mod cli;
pub mod engines;
pub mod lattice;
pub mod rng;

pub use engines::{ClockDistribution, EngineKind, GrowthTrace, HitResult, SimConfig};
pub use lattice::{Cluster, StripRegion, Vertex};
pub use rng::{derive_stream, RngStream};
