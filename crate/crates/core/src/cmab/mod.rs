//! Combinatorial multi-armed bandits with semi-bandit feedback.
//!
//! Arms carry Beta posteriors (Thompson sampling) or empirical means with
//! confidence bonuses (CUCB). A super arm is a set of `k` arms; the reward of
//! a super arm under the linear model is the sum of its arms' means.

mod env;
mod harness;
mod posterior;
mod ucb;

pub use env::{greedy_optimal, record_round, BanditEnvironment, RegretTracker, RewardKind};
pub use harness::{run_bandit_experiment, BanditPolicy, BanditRun};
pub use posterior::{sample_thompson, update_posteriors, BetaPosteriorBank, OutcomeVector};
pub use ucb::{select_cucb, update_cucb, UcbState};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CmabError {
    #[error("k={k} must be in 1..={arms}")]
    InvalidK { k: usize, arms: usize },
    #[error("posterior for arm {arm} is invalid (alpha={alpha}, beta={beta})")]
    InvalidPosterior { arm: usize, alpha: f64, beta: f64 },
    #[error("scaling factor must be positive, got {0}")]
    InvalidScaling(f64),
    #[error("outcome vector has {got} entries, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("outcome {value} for arm {arm} is outside [0, 1]")]
    OutcomeOutOfRange { arm: usize, value: f64 },
    #[error("played arm {0} has no observed outcome")]
    MissingOutcome(usize),
    #[error("arm index {index} out of range for {arms} arms")]
    ArmOutOfRange { index: usize, arms: usize },
    #[error("mean {value} for arm {arm} is outside [0, 1]")]
    InvalidMean { arm: usize, value: f64 },
    #[error("horizon must be at least 1")]
    EmptyHorizon,
}

pub(crate) fn check_k(k: usize, arms: usize) -> Result<(), CmabError> {
    if k == 0 || k > arms {
        return Err(CmabError::InvalidK { k, arms });
    }
    Ok(())
}

/// A set of distinct arm indices, stored sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SuperArm {
    indices: Vec<usize>,
}

impl SuperArm {
    /// Builds a super arm, sorting and validating the indices.
    pub fn new(mut indices: Vec<usize>, arm_count: usize) -> Result<Self, CmabError> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&bad) = indices.iter().find(|&&i| i >= arm_count) {
            return Err(CmabError::ArmOutOfRange { index: bad, arms: arm_count });
        }
        Ok(Self { indices })
    }

    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.indices.binary_search(&arm).is_ok()
    }
}
