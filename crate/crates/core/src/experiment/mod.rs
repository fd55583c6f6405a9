//! Config-driven experiment execution and CSV metrics.

mod compare;
mod config;
mod runner;

pub use compare::{compare, CompareRow, CompareTable};
pub use config::{
    parse_config, parse_config_str, BanditConfig, DatasetSource, ExperimentConfig, Mode, DEFAULT_SYNTHETIC,
};
pub use runner::{bandit_csv, federation_csv, load_data, run, RunOutput, BANDIT_HEADER, FEDERATION_HEADER};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("missing mandatory key `{0}`")]
    MissingKey(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("cannot read config: {0}")]
    Io(String),
    #[error("configs are not comparable: {0}")]
    Incomparable(String),
}
