//! JSON request and response bodies of the HTTP service.

use serde::{Deserialize, Serialize};

use crate::cost::Method;
use crate::experiment::CompareRow;
use crate::sparse::LayerShape;

/// Config file contents plus the directory relative dataset paths resolve
/// against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSource {
    pub text: String,
    #[serde(default)]
    pub base_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    pub config: ConfigSource,
    /// Overrides the config's `seed`.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResponse {
    pub method: String,
    pub seed: u64,
    /// `out` from the config, if set.
    pub out: Option<String>,
    pub rows: usize,
    pub summary: String,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRequest {
    pub configs: Vec<ConfigSource>,
    /// Overrides every config's master seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareResponse {
    pub rows: Vec<CompareRow>,
    /// Aligned plain-text table.
    pub table: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlopsRequest {
    pub method: Method,
    pub outer: bool,
    /// Dense forward FLOPs over the local data.
    pub dense: u64,
    /// Sparse forward FLOPs over the local data.
    pub sparse: u64,
    pub epochs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlopsResponse {
    pub flops: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErkRequest {
    pub shapes: Vec<LayerShape>,
    pub target_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErkResponse {
    pub densities: Vec<f64>,
    pub budgets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaRequest {
    pub t: u64,
    pub t_end: u64,
    pub active: usize,
    pub alpha_adj: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaResponse {
    pub kappa: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}
