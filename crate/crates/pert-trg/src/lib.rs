//! First-order interacting extension of the free-boson coarse-graining flow.
//!
//! The free flow keeps a gaussian bond weight exact at every scale; switching
//! on a quartic vertex adds one polynomial insertion per lattice site. To
//! first order in the coupling those insertions never multiply each other, so
//! the flow closes on (gaussian weight) x (single quartic/quadratic/constant
//! correction), and each coarse-graining step moves the correction through the
//! same splitting and plaquette integration that drives the free flow.

mod error;
mod space;
pub mod sym4;

pub use error::PertTrgError;
pub use space::{FieldIndexSpace, IndexRole, SpaceBlock};
pub use sym4::{transport4_sym, SymTensor4};
