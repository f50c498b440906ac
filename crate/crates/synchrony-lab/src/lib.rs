//! Analysis toolkit for networks of identical coupled cells.
//!
//! The library enumerates synchrony subspaces (balanced partitions) of a
//! typed network, detects patterns that are not forced by graph symmetry,
//! builds gradient-like coupled oscillator systems whose Jacobians are
//! signed graph Laplacians, locates equilibria inside synchrony subspaces,
//! and bounds their stability through spectral theory of signed graphs.

pub mod automorphism;
pub mod cli;
pub mod dynamics;
pub mod expr;
pub mod fields;
pub mod fixtures;
pub mod graph;
pub mod linalg;
pub mod partition;
pub mod spectra;
pub mod synchrony;
pub mod verify;

pub use graph::NetworkGraph;
pub use partition::Partition;
