//! Federated dynamic sparse training driven by combinatorial Thompson sampling.
//!
//! The crate is organised bottom-up:
//!
//! - [`cmab`]: Beta-Bernoulli posteriors, Thompson and CUCB super-arm
//!   selection, synthetic bandit environments and regret accounting.
//! - [`sparse`]: masked multilayer perceptrons with manual backprop, magnitude
//!   ranking and Erdős–Rényi layer-wise density allocation.
//! - [`data`]: synthetic Gaussian-cluster datasets, CSV loading and Dirichlet
//!   label-skew partitioning.
//! - [`fed`]: the two-loop federated training procedure with pluggable
//!   topology adjusters (Thompson sampling, CUCB, deterministic prune/regrow).
//! - [`cost`]: sparse storage sizing and per-round communication/FLOPs ledgers.
//! - [`experiment`]: config parsing, seeded experiment execution and CSV metrics.

pub mod api;
pub mod cmab;
pub mod cost;
pub mod data;
pub mod experiment;
pub mod fed;
pub mod rng;
pub mod sparse;
pub mod topk;

mod error;

pub use error::{Error, Result};
