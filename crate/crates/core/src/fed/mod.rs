//! Federated dynamic sparse training.
//!
//! Every round samples clients, trains them locally with masked SGD and
//! aggregates their weights. Inner rounds keep the topology fixed and feed
//! weight-magnitude outcomes of the active links to the adjuster; every
//! `adjust_interval` rounds (until `adjust_cutoff`) an outer round also
//! collects per-client top-gradient indices of inactive links and lets the
//! adjuster choose a new topology with the same per-layer link counts.

mod adjust;
mod arms;
mod client;
mod config;
mod outcomes;
mod run;
mod schedule;

pub use adjust::{cucb_step, prune_regrow_step, tsadj_step, AdjustInput, AdjusterState};
pub use arms::ArmIndexMap;
pub use client::{local_train, ClientUpdate};
pub use config::{AdjusterKind, FederationConfig};
pub use outcomes::{compute_full_outcomes, compute_semi_outcomes, fuse_outcomes, LayerOutcomes};
pub use run::{aggregate, prepare_data, run_federation, FederationRun, PreparedData, RoundMetrics};
pub use schedule::kappa_schedule;

use thiserror::Error;

use crate::cmab::CmabError;
use crate::cost::CostError;
use crate::data::DataError;
use crate::sparse::ModelError;

#[derive(Debug, Error)]
pub enum FedError {
    #[error("invalid federation config: {0}")]
    InvalidConfig(String),
    #[error("no client updates to aggregate")]
    NoClients,
    #[error("client {0} did not report top-gradient indices on an outer round")]
    MissingGradientIndices(usize),
    #[error("inconsistent update: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Cmab(#[from] CmabError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Cost(#[from] CostError),
}
