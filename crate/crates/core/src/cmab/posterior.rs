use rand::Rng;
use rand_distr::{Beta, Distribution};

use super::{check_k, CmabError, SuperArm};
use crate::topk;

/// Per-arm Beta(alpha, beta) posteriors.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaPosteriorBank {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl BetaPosteriorBank {
    /// Uniform prior, alpha = beta = 1 for every arm.
    pub fn uniform(arm_count: usize) -> Self {
        Self { alpha: vec![1.0; arm_count], beta: vec![1.0; arm_count] }
    }

    pub fn from_params(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self, CmabError> {
        if alpha.len() != beta.len() {
            return Err(CmabError::LengthMismatch { expected: alpha.len(), got: beta.len() });
        }
        let bank = Self { alpha, beta };
        bank.validate()?;
        Ok(bank)
    }

    pub fn arm_count(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.alpha[arm] / (self.alpha[arm] + self.beta[arm])
    }

    fn validate(&self) -> Result<(), CmabError> {
        for (arm, (&alpha, &beta)) in self.alpha.iter().zip(&self.beta).enumerate() {
            if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
                return Err(CmabError::InvalidPosterior { arm, alpha, beta });
            }
        }
        Ok(())
    }

    /// Applies [`update_posteriors`] in place.
    pub fn update(&mut self, outcomes: &OutcomeVector, scaling: f64) -> Result<(), CmabError> {
        if !(scaling > 0.0 && scaling.is_finite()) {
            return Err(CmabError::InvalidScaling(scaling));
        }
        if outcomes.len() != self.arm_count() {
            return Err(CmabError::LengthMismatch { expected: self.arm_count(), got: outcomes.len() });
        }
        for (i, x) in outcomes.iter().enumerate() {
            if let Some(x) = x {
                self.alpha[i] += scaling * x;
                self.beta[i] += scaling * (1.0 - x);
            }
        }
        Ok(())
    }

    /// Draws one sample per arm from its posterior.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>, CmabError> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .enumerate()
            .map(|(arm, (&alpha, &beta))| {
                Beta::new(alpha, beta).map(|d| d.sample(rng)).map_err(|_| CmabError::InvalidPosterior {
                    arm,
                    alpha,
                    beta,
                })
            })
            .collect()
    }
}

/// Per-arm outcomes in `[0, 1]`; `None` marks an arm that was not observed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutcomeVector {
    values: Vec<Option<f64>>,
}

impl OutcomeVector {
    pub fn new(values: Vec<Option<f64>>) -> Result<Self, CmabError> {
        for (arm, v) in values.iter().enumerate() {
            if let Some(x) = *v {
                if !(0.0..=1.0).contains(&x) {
                    return Err(CmabError::OutcomeOutOfRange { arm, value: x });
                }
            }
        }
        Ok(Self { values })
    }

    pub fn unobserved(len: usize) -> Self {
        Self { values: vec![None; len] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, arm: usize) -> Option<f64> {
        self.values[arm]
    }

    /// Sets an observed value; panics outside `[0, 1]`.
    pub fn set(&mut self, arm: usize, value: f64) {
        assert!((0.0..=1.0).contains(&value), "outcome {value} outside [0,1]");
        self.values[arm] = Some(value);
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.values.iter().copied()
    }

    pub fn as_slice(&self) -> &[Option<f64>] {
        &self.values
    }
}

/// Thompson-sampling super-arm selection: draws one Beta sample per arm and
/// returns the `k` arms with the largest samples.
pub fn sample_thompson<R: Rng + ?Sized>(
    bank: &BetaPosteriorBank,
    k: usize,
    rng: &mut R,
) -> Result<SuperArm, CmabError> {
    check_k(k, bank.arm_count())?;
    bank.validate()?;
    let xi = bank.sample(rng)?;
    Ok(SuperArm::from_sorted(topk::top_k(&xi, k)))
}

/// Conjugate update `alpha += scaling * x`, `beta += scaling * (1 - x)` for
/// every observed arm. Fractional outcomes are applied as-is; the conjugacy
/// reading is exact only for `x` in `{0, 1}`.
pub fn update_posteriors(
    bank: &BetaPosteriorBank,
    outcomes: &OutcomeVector,
    scaling: f64,
) -> Result<BetaPosteriorBank, CmabError> {
    let mut next = bank.clone();
    next.update(outcomes, scaling)?;
    Ok(next)
}
