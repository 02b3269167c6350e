//! Discrete Schrödinger operators on periodic lattices.
//!
//! Lattice construction, real-space operators and truncations, momentum-space
//! symbols and Fermi surfaces, height-function decay propagation, unique
//! continuation audits on finite graphs with boundary, and explicit paths
//! joining complex Fermi-surface points to the real torus.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod connectivity;
pub mod error;
pub mod height;
pub mod io;
pub mod lattice;
pub mod momentum;
pub mod operators;
pub mod pipeline;
pub mod ucp;

pub use error::{Error, Result};
pub use lattice::{builtin_lattice, BuiltinLattice, LatticeFunction, LatticeSpec, VertexId};
