#![allow(dead_code)]

use rand::seq::SliceRandom;

use fedrts_core::data::{Dataset, SyntheticSpec};
use fedrts_core::fed::FederationConfig;
use fedrts_core::rng::{self, tag};
use fedrts_core::sparse::{erk_allocate, layer_budgets, random_mask_with_counts, SparseModel};

/// Largest relative error between backprop and central finite differences
/// over every weight and bias. The denominator is floored at `floor` so
/// near-zero gradients, where the difference quotient's own rounding error
/// dominates, are effectively compared in absolute terms.
pub fn gradient_check(model: &SparseModel, features: &[f64], labels: &[usize], eps: f64, floor: f64) -> f64 {
    let (grads, _) = model.backward(features, labels).unwrap();
    let mut worst: f64 = 0.0;
    let mut compare = |analytic: f64, numeric: f64| {
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor);
        worst = worst.max(rel);
    };
    for l in 0..model.layers().len() {
        for i in 0..model.layers()[l].weights().len() {
            let mut plus = model.clone();
            plus.weights_mut(l)[i] += eps;
            let mut minus = model.clone();
            minus.weights_mut(l)[i] -= eps;
            let numeric = (plus.loss(features, labels).unwrap() - minus.loss(features, labels).unwrap()) / (2.0 * eps);
            compare(grads.weights[l][i], numeric);
        }
        for i in 0..model.layers()[l].bias().len() {
            let mut plus = model.clone();
            plus.bias_mut(l)[i] += eps;
            let mut minus = model.clone();
            minus.bias_mut(l)[i] -= eps;
            let numeric = (plus.loss(features, labels).unwrap() - minus.loss(features, labels).unwrap()) / (2.0 * eps);
            compare(grads.biases[l][i], numeric);
        }
    }
    worst
}

/// Per-round test accuracy, train loss and model of centralised masked SGD,
/// set up with the same seed streams a one-client federation uses.
pub fn centralized_masked_sgd(config: &FederationConfig, data: &Dataset) -> (Vec<f64>, Vec<f64>, SparseModel) {
    let (train, test) = data.split(config.test_fraction, &mut rng::stream(config.seed, &[tag::SPLIT]));
    let mut model = SparseModel::init(
        train.feature_dim(),
        &config.hidden_layers,
        train.classes(),
        &mut rng::stream(config.seed, &[tag::INIT_WEIGHTS]),
    );
    let shapes = model.prunable_shapes();
    let densities = erk_allocate(&shapes, config.target_density).unwrap();
    let budgets = layer_budgets(&shapes, &densities, config.target_density).unwrap();
    let masks = random_mask_with_counts(&shapes, &budgets, &mut rng::stream(config.seed, &[tag::INIT_MASK]));
    for (l, mask) in model.prunable_layers().into_iter().zip(masks) {
        model.set_mask(l, mask).unwrap();
    }

    let mut accuracy = Vec::new();
    let mut losses = Vec::new();
    let n = train.len();
    let (mut feats, mut labels) = (Vec::new(), Vec::new());
    for t in 1..=config.rounds {
        let mut rng = rng::stream(config.seed, &[tag::CLIENT_TRAIN, t, 0]);
        let mut order: Vec<usize> = (0..n).collect();
        let mut loss = 0.0;
        for _ in 0..config.local_epochs {
            order.shuffle(&mut rng);
            loss = 0.0;
            for batch in order.chunks(config.batch_size) {
                train.gather(batch, &mut feats, &mut labels);
                let (grads, l) = model.backward(&feats, &labels).unwrap();
                model.sgd_step(&grads, config.learning_rate);
                loss += l * batch.len() as f64;
            }
            loss /= n as f64;
        }
        let predicted = model.predict(test.features()).unwrap();
        let hits = predicted.iter().zip(test.labels()).filter(|(p, y)| p == y).count();
        accuracy.push(hits as f64 / test.len() as f64);
        losses.push(loss);
    }
    (accuracy, losses, model)
}

/// Mean total-variation distance between each client's label distribution
/// and the uniform distribution over classes.
pub fn mean_label_tv(data: &Dataset, clients: &[Vec<usize>]) -> f64 {
    let c = data.classes();
    let total: f64 = clients
        .iter()
        .map(|idx| {
            let mut hist = vec![0.0; c];
            for &i in idx {
                hist[data.labels()[i]] += 1.0;
            }
            0.5 * hist.iter().map(|h| (h / idx.len() as f64 - 1.0 / c as f64).abs()).sum::<f64>()
        })
        .sum();
    total / clients.len() as f64
}

/// The 10-class Gaussian-cluster task used by the federation acceptance runs.
pub const ACCEPTANCE_DATA: SyntheticSpec =
    SyntheticSpec { classes: 10, features: 64, samples_per_class: 200, spread: 1.0, separation: 4.0 };
