//! HTTP/JSON front end for the simulator.
//!
//! | Method | Path                      | Body               |
//! |--------|---------------------------|--------------------|
//! | GET    | `/health`                 |                    |
//! | POST   | `/v1/experiments/run`     | [`RunRequest`]     |
//! | POST   | `/v1/experiments/compare` | [`CompareRequest`] |
//! | POST   | `/v1/cost/storage`        | `TensorStorageSpec`|
//! | POST   | `/v1/cost/flops`          | [`FlopsRequest`]   |
//! | POST   | `/v1/sparsity/erk`        | [`ErkRequest`]     |
//! | POST   | `/v1/schedule/kappa`      | [`KappaRequest`]   |
//!
//! Experiments are CPU-bound and run on the blocking pool. Failures return a
//! JSON [`ErrorBody`] with status 400 for bad configs and 422 for requests
//! the simulator rejects.

use std::net::SocketAddr;
use std::path::Path;

use axum::extract::Json;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

use fedrts_core::api::{
    CompareRequest, CompareResponse, ConfigSource, ErkRequest, ErkResponse, ErrorBody, FlopsRequest, FlopsResponse,
    KappaRequest, KappaResponse, RunRequest, RunResponse,
};
use fedrts_core::cost::{round_flops, storage_size, StorageSize, TensorStorageSpec};
use fedrts_core::experiment::{self, ExperimentConfig};
use fedrts_core::fed::kappa_schedule;
use fedrts_core::sparse::{erk_allocate, layer_budgets};
use fedrts_core::Error;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn internal(message: impl Into<String>) -> Self {
        ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, message: message.into() }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Config(_) => StatusCode::BAD_REQUEST,
            Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError { status, message: e.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.message })).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn parse(source: &ConfigSource, seed: Option<u64>) -> Result<ExperimentConfig, Error> {
    let config = experiment::parse_config_str(&source.text, source.base_dir.as_deref().map(Path::new))?;
    Ok(match seed {
        Some(s) => config.with_seed(s),
        None => config,
    })
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, Error> + Send + 'static,
{
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(e.to_string()))?.map_err(ApiError::from)
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    version: &'static str,
}

async fn health() -> Json<Health> {
    Json(Health { status: "ok", version: env!("CARGO_PKG_VERSION") })
}

async fn run_experiment(Json(req): Json<RunRequest>) -> ApiResult<RunResponse> {
    let config = parse(&req.config, req.seed)?;
    tracing::info!(method = config.method_name(), seed = config.seed, "run");
    let response = blocking(move || {
        let output = experiment::run(&config)?;
        Ok(RunResponse {
            method: config.method_name().to_string(),
            seed: config.seed,
            out: config.out.as_ref().map(|p| p.display().to_string()),
            rows: output.rows,
            summary: output.summary,
            csv: output.csv,
        })
    })
    .await?;
    Ok(Json(response))
}

async fn compare_experiments(Json(req): Json<CompareRequest>) -> ApiResult<CompareResponse> {
    let configs = req.configs.iter().map(|c| parse(c, req.seed)).collect::<Result<Vec<_>, _>>()?;
    tracing::info!(configs = configs.len(), "compare");
    let table = blocking(move || experiment::compare(&configs)).await?;
    Ok(Json(CompareResponse { table: table.render(), rows: table.rows }))
}

async fn storage(Json(spec): Json<TensorStorageSpec>) -> ApiResult<StorageSize> {
    if spec.nonzeros > spec.rows.saturating_mul(spec.cols) {
        return Err(ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            message: "nonzeros exceed the tensor size".into(),
        });
    }
    Ok(Json(storage_size(&spec)))
}

async fn flops(Json(req): Json<FlopsRequest>) -> ApiResult<FlopsResponse> {
    let flops = round_flops(req.method, req.outer, req.dense, req.sparse, req.epochs).map_err(Error::from)?;
    Ok(Json(FlopsResponse { flops }))
}

async fn erk(Json(req): Json<ErkRequest>) -> ApiResult<ErkResponse> {
    let densities = erk_allocate(&req.shapes, req.target_density).map_err(Error::from)?;
    let budgets = layer_budgets(&req.shapes, &densities, req.target_density).map_err(Error::from)?;
    Ok(Json(ErkResponse { densities, budgets }))
}

async fn kappa(Json(req): Json<KappaRequest>) -> ApiResult<KappaResponse> {
    if !(0.0..=1.0).contains(&req.alpha_adj) {
        return Err(ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            message: "alpha_adj must lie in [0, 1]".into(),
        });
    }
    Ok(Json(KappaResponse { kappa: kappa_schedule(req.t, req.t_end, req.active, req.alpha_adj) }))
}

pub fn router() -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/v1/experiments/run", post(run_experiment))
        .route("/v1/experiments/compare", post(compare_experiments))
        .route("/v1/cost/storage", post(storage))
        .route("/v1/cost/flops", post(flops))
        .route("/v1/sparsity/erk", post(erk))
        .route("/v1/schedule/kappa", post(kappa))
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}

/// Binds `addr` and serves in a background task. Returns the bound address,
/// which differs from `addr` when its port is 0.
pub async fn spawn(addr: SocketAddr) -> std::io::Result<(SocketAddr, JoinHandle<std::io::Result<()>>)> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    Ok((local, tokio::spawn(serve(listener))))
}
