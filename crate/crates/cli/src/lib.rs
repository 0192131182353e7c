//! Library side of the `zalmtwin` command: sweeps and the oracle validation
//! report.

pub mod params;
pub mod sweep;
pub mod validate;
