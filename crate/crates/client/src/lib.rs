//! Thin async client for the FedRTS HTTP service.

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

pub use fedrts_core::api::*;
use fedrts_core::cost::{StorageSize, TensorStorageSpec};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),
    #[error("server returned {status}: {message}")]
    Api { status: u16, message: String },
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the server root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Client { base: base.into().trim_end_matches('/').to_string(), http: reqwest::Client::new() }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn decode<T: DeserializeOwned>(response: reqwest::Response) -> Result<T, ClientError> {
        let status = response.status();
        if status.is_success() {
            return Ok(response.json().await?);
        }
        let text = response.text().await?;
        let message = serde_json::from_str::<ErrorBody>(&text).map(|b| b.error).unwrap_or(text);
        Err(ClientError::Api { status: status.as_u16(), message })
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T, ClientError> {
        let response = self.http.post(format!("{}{path}", self.base)).json(body).send().await?;
        Self::decode(response).await
    }

    /// `Ok` iff the server answers its health probe.
    pub async fn health(&self) -> Result<(), ClientError> {
        let response = self.http.get(format!("{}/health", self.base)).send().await?;
        Self::decode::<serde_json::Value>(response).await.map(|_| ())
    }

    pub async fn run(&self, request: &RunRequest) -> Result<RunResponse, ClientError> {
        self.post("/v1/experiments/run", request).await
    }

    pub async fn compare(&self, request: &CompareRequest) -> Result<CompareResponse, ClientError> {
        self.post("/v1/experiments/compare", request).await
    }

    pub async fn storage(&self, spec: &TensorStorageSpec) -> Result<StorageSize, ClientError> {
        self.post("/v1/cost/storage", spec).await
    }

    pub async fn flops(&self, request: &FlopsRequest) -> Result<FlopsResponse, ClientError> {
        self.post("/v1/cost/flops", request).await
    }

    pub async fn erk(&self, request: &ErkRequest) -> Result<ErkResponse, ClientError> {
        self.post("/v1/sparsity/erk", request).await
    }

    pub async fn kappa(&self, request: &KappaRequest) -> Result<KappaResponse, ClientError> {
        self.post("/v1/schedule/kappa", request).await
    }
}
