//! Masked multilayer perceptrons.
//!
//! Each layer holds dense weights plus a binary mask of the same shape. The
//! invariant `weight == 0` wherever `mask == 0` is restored by
//! [`SparseModel::apply_mask`] after every mutation, so the forward pass can
//! use the stored weights directly and the backward pass yields the gradient
//! of the dense parameterisation (including at inactive positions).

mod erk;
mod mask;
mod model;

pub use erk::{erk_allocate, layer_budgets};
pub use mask::{magnitude_topk, random_mask, random_mask_with_counts};
pub use model::{Forward, GradientSet, Layer, SparseModel};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    ShapeError(String),
    #[error("target density {0} must lie in (0, 1]")]
    InvalidDensity(f64),
    #[error("density budget cannot be met: {0}")]
    InfeasibleDensity(String),
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
}

/// Shape of one fully connected layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayerShape {
    pub fan_in: usize,
    pub fan_out: usize,
}

impl LayerShape {
    pub fn new(fan_in: usize, fan_out: usize) -> Self {
        assert!(fan_in >= 1 && fan_out >= 1, "layer dimensions must be positive");
        Self { fan_in, fan_out }
    }

    pub fn len(&self) -> usize {
        self.fan_in * self.fan_out
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
