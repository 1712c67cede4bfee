//! Low-coherence frame design by majorization-minimization.
//!
//! The crate builds unit-norm frames whose mutual coherence approaches the
//! Welch and composite lower bounds, together with alternating-projection
//! baselines and a compressed-sensing evaluation harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accel;
pub mod baselines;
pub mod coherence;
pub mod cs;
pub mod error;
pub mod frame;
pub mod init;
pub mod io;
pub mod rng;
pub mod solver;

pub use coherence::{coherence, composite_bound, mutual_coherence, welch_bound, CoherenceReport};
pub use error::{Result, TeletError};
pub use frame::{Field, Frame, PairIndex};
pub use init::init_frame;
pub use solver::{solve, Acceleration, SolverConfig};

#[cfg(test)]
pub(crate) mod testutil;
