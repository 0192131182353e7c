//! Brute-force truncated Fock-space reference for the cascaded source.
//!
//! Independent of the Gaussian engine: states are built from squeezer
//! Schmidt coefficients and splitter amplitudes, loss is applied through its
//! Kraus operators, and every figure of merit is a direct sum over Fock
//! amplitudes.

pub mod cascade;
pub mod fock;
pub mod metrics;
pub mod state;

pub use metrics::*;
pub use state::{oracle_apply_loss, oracle_build_cascaded, TruncatedState};
