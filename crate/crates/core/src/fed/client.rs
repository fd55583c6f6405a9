use rand::seq::SliceRandom;
use rand::Rng;

use crate::data::Dataset;
use crate::sparse::{ModelError, SparseModel};
use crate::topk;

/// What a client sends back after local training.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientUpdate {
    pub client: usize,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    /// Layer-local indices of the largest dense-gradient magnitudes among
    /// the inactive links of each prunable layer (outer rounds only).
    pub gradient_indices: Option<Vec<Vec<usize>>>,
    pub samples: usize,
    /// Mean training loss over the final local epoch.
    pub loss: f64,
}

/// Masked SGD for `epochs` passes over shuffled mini-batches of the shard.
///
/// With `gradient_widths` set (outer rounds), one extra batch is sampled and
/// the dense gradient at the trained weights ranks the inactive links of each
/// prunable layer; the top `gradient_widths[j]` are reported.
#[allow(clippy::too_many_arguments)]
pub fn local_train<R: Rng + ?Sized>(
    client: usize,
    global: &SparseModel,
    shard: &Dataset,
    epochs: u64,
    learning_rate: f64,
    batch_size: usize,
    gradient_widths: Option<&[usize]>,
    rng: &mut R,
) -> Result<ClientUpdate, ModelError> {
    let mut model = global.clone();
    let n = shard.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut loss = 0.0;
    for _ in 0..epochs {
        order.shuffle(rng);
        loss = 0.0;
        for batch in order.chunks(batch_size) {
            shard.gather(batch, &mut features, &mut labels);
            let (grads, batch_loss) = model.backward(&features, &labels)?;
            model.sgd_step(&grads, learning_rate);
            loss += batch_loss * batch.len() as f64;
        }
        loss /= n as f64;
    }

    let gradient_indices = match gradient_widths {
        None => None,
        Some(widths) => {
            let batch: Vec<usize> = rand::seq::index::sample(rng, n, batch_size.min(n)).into_vec();
            shard.gather(&batch, &mut features, &mut labels);
            let (grads, _) = model.backward(&features, &labels)?;
            let picks = model
                .prunable_layers()
                .into_iter()
                .zip(widths)
                .map(|(l, &width)| {
                    let mask = model.layers()[l].mask();
                    let inactive: Vec<usize> = (0..mask.len()).filter(|&i| !mask[i]).collect();
                    let magnitude: Vec<f64> = grads.weights[l].iter().map(|g| g.abs()).collect();
                    topk::top_k_among(&magnitude, &inactive, width.min(inactive.len()))
                })
                .collect();
            Some(picks)
        }
    };

    let weights = model.layers().iter().map(|l| l.weights().to_vec()).collect();
    let biases = model.layers().iter().map(|l| l.bias().to_vec()).collect();
    Ok(ClientUpdate { client, weights, biases, gradient_indices, samples: n, loss })
}
