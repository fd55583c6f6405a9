use rayon::prelude::*;

use super::adjust::{AdjustInput, AdjusterState};
use super::client::{local_train, ClientUpdate};
use super::schedule::kappa_schedule;
use super::{FedError, FederationConfig};
use crate::cost::{self, CostLedger, CostRecord, GradientPayload, VALUE_BITS};
use crate::data::{dirichlet_partition, Dataset, Partition};
use crate::rng::{self, tag};
use crate::sparse::{erk_allocate, layer_budgets, random_mask_with_counts, SparseModel};

/// Held-out split, client partition and materialised client shards.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: Dataset,
    pub test: Dataset,
    pub partition: Partition,
    pub shards: Vec<Dataset>,
}

/// Splits off the test set, then partitions the remaining rows across
/// clients.
pub fn prepare_data(config: &FederationConfig, data: &Dataset) -> Result<PreparedData, FedError> {
    let (train, test) = data.split(config.test_fraction, &mut rng::stream(config.seed, &[tag::SPLIT]));
    let partition = dirichlet_partition(
        &train,
        config.total_clients,
        config.dirichlet_alpha,
        &mut rng::stream(config.seed, &[tag::PARTITION]),
    )?;
    let shards = partition.client_indices().iter().map(|idx| train.subset(idx)).collect();
    Ok(PreparedData { train, test, partition, shards })
}

/// One row of the per-round time series.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundMetrics {
    pub round: u64,
    pub test_accuracy: f64,
    pub train_loss: f64,
    pub density: f64,
    pub mask_churn: f64,
    pub upload_bits_cum: u64,
    pub download_bits_cum: u64,
    pub flops_cum: u64,
    pub outer: bool,
    /// Active links per prunable layer after the round.
    pub layer_active: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FederationRun {
    pub metrics: Vec<RoundMetrics>,
    pub model: SparseModel,
    pub ledger: CostLedger,
    /// `K_l`: active links per prunable layer.
    pub budgets: Vec<usize>,
    pub adjuster: AdjusterState,
}

impl FederationRun {
    /// Churn of every outer round, in order.
    pub fn adjustment_churn(&self) -> Vec<f64> {
        self.metrics.iter().filter(|m| m.outer).map(|m| m.mask_churn).collect()
    }

    /// Mean test accuracy over the last `window` rounds.
    pub fn trailing_accuracy(&self, window: usize) -> f64 {
        let tail = &self.metrics[self.metrics.len().saturating_sub(window)..];
        tail.iter().map(|m| m.test_accuracy).sum::<f64>() / tail.len() as f64
    }
}

/// Sample-weighted average of client parameters, accumulated in ascending
/// client order. Returns `(weights, biases, participant weights)`.
#[allow(clippy::type_complexity)]
pub fn aggregate(updates: &[ClientUpdate]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>), FedError> {
    let first = updates.first().ok_or(FedError::NoClients)?;
    let mut order: Vec<&ClientUpdate> = updates.iter().collect();
    order.sort_by_key(|u| u.client);
    let total: usize = order.iter().map(|u| u.samples).sum();
    if total == 0 {
        return Err(FedError::Inconsistent("participants hold no samples".into()));
    }
    let p: Vec<f64> = order.iter().map(|u| u.samples as f64 / total as f64).collect();
    let mut weights: Vec<Vec<f64>> = first.weights.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut biases: Vec<Vec<f64>> = first.biases.iter().map(|b| vec![0.0; b.len()]).collect();
    for (u, &pn) in order.iter().zip(&p) {
        if u.weights.len() != weights.len()
            || u.weights.iter().zip(&weights).any(|(a, b)| a.len() != b.len())
            || u.biases.iter().zip(&biases).any(|(a, b)| a.len() != b.len())
        {
            return Err(FedError::Inconsistent(format!("client {} reports mismatched shapes", u.client)));
        }
        for (acc, w) in weights.iter_mut().zip(&u.weights) {
            for (a, x) in acc.iter_mut().zip(w) {
                *a += pn * x;
            }
        }
        for (acc, b) in biases.iter_mut().zip(&u.biases) {
            for (a, x) in acc.iter_mut().zip(b) {
                *a += pn * x;
            }
        }
    }
    Ok((weights, biases, p))
}

fn accuracy(model: &SparseModel, data: &Dataset) -> Result<f64, FedError> {
    let predicted = model.predict(data.features())?;
    let hits = predicted.iter().zip(data.labels()).filter(|(p, y)| p == y).count();
    Ok(hits as f64 / data.len() as f64)
}

/// Builds the initial model: He-uniform weights, ERK budgets per prunable
/// layer and a uniformly random mask with exactly those counts.
pub(crate) fn initial_model(config: &FederationConfig, data: &Dataset) -> Result<(SparseModel, Vec<usize>), FedError> {
    let mut model = SparseModel::init(
        data.feature_dim(),
        &config.hidden_layers,
        data.classes(),
        &mut rng::stream(config.seed, &[tag::INIT_WEIGHTS]),
    );
    let shapes = model.prunable_shapes();
    if shapes.is_empty() {
        return Ok((model, Vec::new()));
    }
    let density = config.effective_density();
    let densities = erk_allocate(&shapes, density)?;
    let budgets = if density >= 1.0 {
        shapes.iter().map(|s| s.len()).collect()
    } else {
        layer_budgets(&shapes, &densities, density)?
    };
    let masks = random_mask_with_counts(&shapes, &budgets, &mut rng::stream(config.seed, &[tag::INIT_MASK]));
    for (l, mask) in model.prunable_layers().into_iter().zip(masks) {
        model.set_mask(l, mask)?;
    }
    Ok((model, budgets))
}

/// Runs `config.rounds` rounds of federated sparse training on `data`.
pub fn run_federation(config: &FederationConfig, data: &Dataset) -> Result<FederationRun, FedError> {
    config.validate()?;
    let prepared = prepare_data(config, data)?;
    let (mut model, budgets) = initial_model(config, &prepared.train)?;
    let prunable = model.prunable_layers();
    let layer_sizes: Vec<usize> = prunable.iter().map(|&l| model.layers()[l].shape().len()).collect();
    let total_prunable: usize = layer_sizes.iter().sum();
    let mut adjuster = AdjusterState::new(config.adjuster, &layer_sizes);
    let method = config.adjuster.method();
    let (dense_fwd, _) = cost::forward_flops_per_sample(&model);

    let mut ledger = CostLedger::new();
    let mut metrics = Vec::with_capacity(config.rounds as usize);

    for t in 1..=config.rounds {
        let mut participants: Vec<usize> = rand::seq::index::sample(
            &mut rng::stream(config.seed, &[tag::CLIENT_SAMPLING, t]),
            config.total_clients,
            config.clients_per_round,
        )
        .into_vec();
        participants.sort_unstable();

        let outer = config.is_outer(t);
        let kappas: Vec<usize> = budgets
            .iter()
            .map(|&k| kappa_schedule(t.min(config.adjust_cutoff), config.adjust_cutoff, k, config.alpha_adj))
            .collect();
        let widths: Vec<usize> =
            budgets.iter().zip(&kappas).zip(&layer_sizes).map(|((&k, &kappa), &n)| (k - kappa).min(n - k)).collect();

        // Costs are charged against the model broadcast at the start of the round.
        let (dense_bits, sparse_bits) = cost::model_storage_bits(&model, VALUE_BITS);
        let (_, sparse_fwd) = cost::forward_flops_per_sample(&model);
        let payload =
            GradientPayload::coo(layer_sizes.iter().zip(&widths).map(|(&n, &w)| (n as u64, w as u64)), VALUE_BITS);
        let mut record = CostRecord { round: t, upload_bits: 0, download_bits: 0, train_flops: 0 };
        for &c in &participants {
            let (up, down) = cost::round_comm_cost(method, outer, dense_bits, sparse_bits, &payload);
            let samples = prepared.shards[c].len() as u64;
            record.upload_bits += up;
            record.download_bits += down;
            record.train_flops +=
                cost::round_flops(method, outer, dense_fwd * samples, sparse_fwd * samples, config.local_epochs)?;
        }
        let totals = ledger.record(record);

        let global = &model;
        let updates: Vec<ClientUpdate> = participants
            .par_iter()
            .map(|&c| {
                let mut r = rng::stream(config.seed, &[tag::CLIENT_TRAIN, t, c as u64]);
                local_train(
                    c,
                    global,
                    &prepared.shards[c],
                    config.local_epochs,
                    config.learning_rate,
                    config.batch_size,
                    outer.then_some(widths.as_slice()),
                    &mut r,
                )
            })
            .collect::<Result<_, _>>()?;

        let (agg_weights, agg_biases, p) = aggregate(&updates)?;
        let train_loss: f64 = updates.iter().zip(&p).map(|(u, pn)| pn * u.loss).sum();
        let old_masks: Vec<Vec<bool>> = prunable.iter().map(|&l| model.layers()[l].mask().to_vec()).collect();

        let new_masks = {
            let gradient_indices: Vec<Option<Vec<Vec<usize>>>> =
                updates.iter().map(|u| u.gradient_indices.clone()).collect();
            let input = AdjustInput {
                masks: old_masks.iter().map(Vec::as_slice).collect(),
                aggregate: prunable.iter().map(|&l| agg_weights[l].as_slice()).collect(),
                clients: updates.iter().map(|u| prunable.iter().map(|&l| u.weights[l].as_slice()).collect()).collect(),
                gradient_indices: &gradient_indices,
                weights: &p,
                kappas: kappas.clone(),
                budgets: budgets.clone(),
            };
            if outer {
                let mut r = rng::stream(config.seed, &[tag::ADJUST, t]);
                adjuster.adjust(&input, config.gamma, config.lambda, &mut r)?
            } else {
                adjuster.observe_inner(&input, config.gamma, config.lambda)?;
                None
            }
        };

        model.set_parameters(&agg_weights, &agg_biases)?;
        let mut churn = 0.0;
        if let Some(masks) = new_masks {
            let flips: usize =
                masks.iter().zip(&old_masks).map(|(a, b)| a.iter().zip(b).filter(|(x, y)| x != y).count()).sum();
            churn = flips as f64 / total_prunable as f64;
            for (&l, mask) in prunable.iter().zip(masks) {
                model.set_mask(l, mask)?;
            }
        }

        metrics.push(RoundMetrics {
            round: t,
            test_accuracy: accuracy(&model, &prepared.test)?,
            train_loss,
            density: model.density(),
            mask_churn: churn,
            upload_bits_cum: totals.upload_bits,
            download_bits_cum: totals.download_bits,
            flops_cum: totals.train_flops,
            outer,
            layer_active: prunable.iter().map(|&l| model.layers()[l].active_count()).collect(),
        });
    }

    Ok(FederationRun { metrics, model, ledger, budgets, adjuster })
}
