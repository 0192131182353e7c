use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, OnceLock};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use zalmtwin_core::kfunction::CONVENTION_SCALE;
use zalmtwin_core::ENGINE_VERSION;

use crate::api::{compute_metrics, compute_spin_dm, MetricsRequest, MetricsResponse, SpinDmResponse};
use crate::cache::MemoCache;
use crate::error::ApiError;

pub const DEFAULT_CACHE_CAPACITY: usize = 1024;

#[derive(Debug)]
pub struct AppState {
    pub cache: MemoCache<MetricsResponse>,
    checksum: OnceLock<String>,
}

impl AppState {
    pub fn new(cache_capacity: usize) -> Self {
        Self {
            cache: MemoCache::new(cache_capacity),
            checksum: OnceLock::new(),
        }
    }
}

impl Default for AppState {
    fn default() -> Self {
        Self::new(DEFAULT_CACHE_CAPACITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub engine_version: String,
    pub convention_scale: f64,
    pub self_test_checksum: String,
}

/// SHA-256 of the serialised response to a fixed reference request.
pub fn self_test_checksum() -> Result<String, ApiError> {
    let mut req = MetricsRequest::new(0.1);
    req.bsm_efficiency = 0.9;
    req.dark_click_prob = 1e-3;
    req.click_pattern = Some([1, 0, 1, 1, 0, 0, 1, 0]);
    let resp = compute_metrics(&req)?;
    let text = serde_json::to_vec(&resp).expect("response serialises");
    Ok(Sha256::digest(&text).iter().map(|b| format!("{b:02x}")).collect())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/metrics", post(metrics))
        .route("/v1/health", get(health))
        .route("/v1/spin_dm", get(spin_dm))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(Arc::new(AppState::default()))).await
}

/// Deserialise with the failing field path in the error.
fn parse_request(value: Value) -> Result<MetricsRequest, ApiError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let message = e.inner().to_string();
        let field = if path.is_empty() || path == "." {
            // Missing and unknown fields are reported against the parent.
            message.split('`').nth(1).map(str::to_owned)
        } else {
            Some(path)
        };
        ApiError::malformed(field, message)
    })
}

async fn run_blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::numerical("evaluation aborted", vec![e.to_string()]))?
}

async fn metrics(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<MetricsResponse>, ApiError> {
    let value: Value = serde_json::from_slice(&body).map_err(|e| ApiError::malformed(None, e.to_string()))?;
    let req = parse_request(value)?;
    let key = serde_json::to_string(&req).expect("request serialises");
    let resp = match state.cache.get(&key) {
        Some(hit) => (*hit).clone(),
        None => {
            let resp = run_blocking(move || compute_metrics(&req)).await?;
            state.cache.insert(key, resp.clone());
            resp
        }
    };
    if !resp.flags.is_empty() {
        return Err(ApiError::numerical("flagged metric", resp.flags));
    }
    Ok(Json(resp))
}

async fn health(State(state): State<Arc<AppState>>) -> Result<Json<Health>, ApiError> {
    let checksum = match state.checksum.get() {
        Some(c) => c.clone(),
        None => {
            let c = run_blocking(self_test_checksum).await?;
            state.checksum.get_or_init(|| c).clone()
        }
    };
    Ok(Json(Health {
        status: "ok".into(),
        engine_version: ENGINE_VERSION.into(),
        convention_scale: CONVENTION_SCALE,
        self_test_checksum: checksum,
    }))
}

/// Query values are JSON scalars; patterns are comma-separated counts.
fn query_to_json(query: HashMap<String, String>) -> Result<Value, ApiError> {
    let mut map = Map::new();
    for (k, v) in query {
        let parsed = match k.as_str() {
            "herald_pattern" | "click_pattern" => serde_json::from_str(&format!("[{v}]"))
                .map_err(|e| ApiError::malformed(Some(k.clone()), e.to_string()))?,
            "bell_target" => Value::String(v),
            _ => serde_json::from_str(&v)
                .map_err(|_| ApiError::malformed(Some(k.clone()), format!("`{v}` is not a number")))?,
        };
        map.insert(k, parsed);
    }
    Ok(Value::Object(map))
}

async fn spin_dm(Query(query): Query<HashMap<String, String>>) -> Result<Json<SpinDmResponse>, ApiError> {
    let req = parse_request(query_to_json(query)?)?;
    Ok(Json(run_blocking(move || compute_spin_dm(&req)).await?))
}
