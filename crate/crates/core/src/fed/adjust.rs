use rand::Rng;

use super::outcomes::{compute_full_outcomes, compute_semi_outcomes, fuse_layers};
use super::{AdjusterKind, FedError};
use crate::cmab::{sample_thompson, select_cucb, BetaPosteriorBank, SuperArm, UcbState};
use crate::topk;

/// Server-side view of one round, restricted to the prunable layers.
#[derive(Debug, Clone)]
pub struct AdjustInput<'a> {
    /// Current mask per prunable layer.
    pub masks: Vec<&'a [bool]>,
    /// Aggregated weights per prunable layer.
    pub aggregate: Vec<&'a [f64]>,
    /// Client weights, `clients[n][j]` for participant `n`, layer `j`.
    pub clients: Vec<Vec<&'a [f64]>>,
    /// Per-client top-gradient indices (layer-local), outer rounds only.
    pub gradient_indices: &'a [Option<Vec<Vec<usize>>>],
    /// Participant weights renormalised to sum to one.
    pub weights: &'a [f64],
    /// Core links per layer.
    pub kappas: Vec<usize>,
    /// Active links per layer.
    pub budgets: Vec<usize>,
}

fn to_mask(arms: &SuperArm, len: usize) -> Vec<bool> {
    let mut mask = vec![false; len];
    for &i in arms.indices() {
        mask[i] = true;
    }
    mask
}

/// Thompson-sampling adjustment: fuse full outcomes, update each layer's
/// posteriors, then activate the `K_l` links with the largest posterior
/// samples in every layer.
pub fn tsadj_step<R: Rng + ?Sized>(
    banks: &mut [BetaPosteriorBank],
    input: &AdjustInput<'_>,
    gamma: f64,
    lambda: f64,
    rng: &mut R,
) -> Result<Vec<Vec<bool>>, FedError> {
    let semi = compute_semi_outcomes(&input.aggregate, &input.clients, &input.masks, &input.kappas);
    let full = compute_full_outcomes(&semi, input.gradient_indices, &input.masks)?;
    let fused = fuse_layers(&full, input.weights, gamma);
    let mut masks = Vec::with_capacity(banks.len());
    for ((bank, x), &k) in banks.iter_mut().zip(&fused).zip(&input.budgets) {
        bank.update(x, lambda)?;
        masks.push(to_mask(&sample_thompson(bank, k, rng)?, bank.arm_count()));
    }
    Ok(masks)
}

/// CUCB adjustment: same fused outcomes as Thompson sampling, running-mean
/// update on every observed link, then the `K_l` largest upper confidence
/// bounds per layer.
pub fn cucb_step(states: &mut [UcbState], input: &AdjustInput<'_>, gamma: f64) -> Result<Vec<Vec<bool>>, FedError> {
    let semi = compute_semi_outcomes(&input.aggregate, &input.clients, &input.masks, &input.kappas);
    let full = compute_full_outcomes(&semi, input.gradient_indices, &input.masks)?;
    let fused = fuse_layers(&full, input.weights, gamma);
    let mut masks = Vec::with_capacity(states.len());
    for ((state, x), &k) in states.iter_mut().zip(&fused).zip(&input.budgets) {
        let observed: Vec<usize> = (0..x.len()).filter(|&i| x.get(i).is_some()).collect();
        state.update(&SuperArm::new(observed, x.len())?, x)?;
        masks.push(to_mask(&select_cucb(state, k)?, state.arm_count()));
    }
    Ok(masks)
}

/// Deterministic prune/regrow: per layer drop the `K_l - kappa_l` active links
/// with the smallest aggregated magnitude and activate the same number of
/// inactive links with the highest client vote `sum_n p_n [i in I_n]`.
/// Ties go to the lowest index; the width is clamped to the inactive count.
pub fn prune_regrow_step(input: &AdjustInput<'_>) -> Result<Vec<Vec<bool>>, FedError> {
    let mut masks = Vec::with_capacity(input.masks.len());
    for (j, mask) in input.masks.iter().enumerate() {
        let active: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
        let inactive: Vec<usize> = (0..mask.len()).filter(|&i| !mask[i]).collect();
        let width = active.len().saturating_sub(input.kappas[j]).min(inactive.len());

        let magnitude: Vec<f64> = input.aggregate[j].iter().map(|w| w.abs()).collect();
        let keep = topk::top_k_among(&magnitude, &active, active.len() - width);

        let mut votes = vec![0.0; mask.len()];
        for (n, indices) in input.gradient_indices.iter().enumerate() {
            let indices = indices.as_ref().ok_or(FedError::MissingGradientIndices(n))?;
            for &i in &indices[j] {
                votes[i] += input.weights[n];
            }
        }
        let regrow = topk::top_k_among(&votes, &inactive, width);

        let mut next = vec![false; mask.len()];
        for i in keep.into_iter().chain(regrow) {
            next[i] = true;
        }
        masks.push(next);
    }
    Ok(masks)
}

/// Adjuster state owned by the server.
#[derive(Debug, Clone, PartialEq)]
pub enum AdjusterState {
    Thompson(Vec<BetaPosteriorBank>),
    Cucb(Vec<UcbState>),
    PruneRegrow,
    Dense,
}

impl AdjusterState {
    /// Uniform priors / fresh UCB state for layers of the given sizes.
    pub fn new(kind: AdjusterKind, layer_sizes: &[usize]) -> Self {
        match kind {
            AdjusterKind::TsAdj => {
                AdjusterState::Thompson(layer_sizes.iter().map(|&n| BetaPosteriorBank::uniform(n)).collect())
            }
            AdjusterKind::Cucb => AdjusterState::Cucb(layer_sizes.iter().map(|&n| UcbState::new(n)).collect()),
            AdjusterKind::PruneRegrow => AdjusterState::PruneRegrow,
            AdjusterKind::Dense => AdjusterState::Dense,
        }
    }

    /// Inner-round bookkeeping: semi-outcomes of the active links update the
    /// posteriors (or UCB means); the topology is left unchanged.
    pub fn observe_inner(&mut self, input: &AdjustInput<'_>, gamma: f64, lambda: f64) -> Result<(), FedError> {
        let fused = match self {
            AdjusterState::Thompson(_) | AdjusterState::Cucb(_) => {
                let semi = compute_semi_outcomes(&input.aggregate, &input.clients, &input.masks, &input.kappas);
                fuse_layers(&semi, input.weights, gamma)
            }
            AdjusterState::PruneRegrow | AdjusterState::Dense => return Ok(()),
        };
        match self {
            AdjusterState::Thompson(banks) => {
                for (bank, x) in banks.iter_mut().zip(&fused) {
                    bank.update(x, lambda)?;
                }
            }
            AdjusterState::Cucb(states) => {
                for ((state, x), mask) in states.iter_mut().zip(&fused).zip(&input.masks) {
                    let active: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
                    state.update(&SuperArm::new(active, mask.len())?, x)?;
                }
            }
            AdjusterState::PruneRegrow | AdjusterState::Dense => {}
        }
        Ok(())
    }

    /// Outer-round topology choice; `None` for the dense baseline.
    pub fn adjust<R: Rng + ?Sized>(
        &mut self,
        input: &AdjustInput<'_>,
        gamma: f64,
        lambda: f64,
        rng: &mut R,
    ) -> Result<Option<Vec<Vec<bool>>>, FedError> {
        match self {
            AdjusterState::Thompson(banks) => tsadj_step(banks, input, gamma, lambda, rng).map(Some),
            AdjusterState::Cucb(states) => cucb_step(states, input, gamma).map(Some),
            AdjusterState::PruneRegrow => prune_regrow_step(input).map(Some),
            AdjusterState::Dense => Ok(None),
        }
    }
}
