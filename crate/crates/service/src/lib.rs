//! JSON-over-HTTP access to the source model: metrics, memory-loaded
//! states and a health probe.

pub mod api;
pub mod cache;
pub mod error;
pub mod http;

pub use api::{compute_metrics, compute_spin_dm, MetricsRequest, MetricsResponse, SpinDmResponse};
pub use error::{ApiError, ErrorBody};
pub use http::{router, self_test_checksum, serve, AppState, Health};
