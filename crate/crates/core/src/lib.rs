//! Numerical laboratory for classical and quantum mean-field limits.
//!
//! The crate bundles N-body and mean-field solvers (Newton/Vlasov particle
//! flows, spectral Schrödinger/Hartree propagators), the coupled dynamics
//! used in Dobrushin-type stability estimates, a coherent-state phase-space
//! toolkit, exact discrete optimal transport, and closed-form evaluators for
//! the right-hand sides of the estimates being checked.

pub mod bounds;
pub mod classical;
pub mod error;
pub mod potential;
pub mod quantum;
pub mod rng;
pub mod transport;

pub use error::{Error, Result};
