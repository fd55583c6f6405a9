//! Classification datasets and non-IID client partitioning.

mod dataset;
mod partition;

pub use dataset::{generate_synthetic, load_dataset, write_dataset, Dataset, SyntheticSpec};
pub use partition::{dirichlet_partition, Partition};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("parse error at line {line}: {message}")]
    ParseError { line: u64, message: String },
    #[error("{clients} clients requested for {samples} samples")]
    TooManyClients { clients: usize, samples: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
