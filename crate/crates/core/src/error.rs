use thiserror::Error;

use crate::cmab::CmabError;
use crate::cost::CostError;
use crate::data::DataError;
use crate::experiment::ConfigError;
use crate::fed::FedError;
use crate::sparse::ModelError;

/// Crate-level error wrapping each subsystem's error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Cmab(#[from] CmabError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Fed(#[from] FedError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
