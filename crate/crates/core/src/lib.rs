//! Exact Gaussian/non-Gaussian model of SPDC and cascaded entanglement
//! sources: heralding probability, Bell fidelity, Fock-basis density-matrix
//! elements and memory-loaded spin-spin states.

pub mod error;
pub mod kfunction;
pub mod memory;
pub mod metrics;
pub mod moments;
pub mod phase_space;
pub mod source;

pub use error::{Error, Result};

/// Version string reported by the command line and the service.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
