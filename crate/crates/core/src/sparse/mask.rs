use rand::Rng;

use super::LayerShape;
use crate::topk;

/// Uniform random masks with exactly `round(density * len)` active entries
/// per layer.
pub fn random_mask<R: Rng + ?Sized>(shapes: &[LayerShape], densities: &[f64], rng: &mut R) -> Vec<Vec<bool>> {
    let counts: Vec<usize> =
        shapes.iter().zip(densities).map(|(s, &d)| ((d * s.len() as f64).round() as usize).min(s.len())).collect();
    random_mask_with_counts(shapes, &counts, rng)
}

/// Uniform random masks with the given number of active entries per layer.
pub fn random_mask_with_counts<R: Rng + ?Sized>(
    shapes: &[LayerShape],
    counts: &[usize],
    rng: &mut R,
) -> Vec<Vec<bool>> {
    shapes
        .iter()
        .zip(counts)
        .map(|(s, &count)| {
            let mut mask = vec![false; s.len()];
            for i in rand::seq::index::sample(rng, s.len(), count.min(s.len())) {
                mask[i] = true;
            }
            mask
        })
        .collect()
}

/// Flat indices of the `k` largest absolute values (ties by lowest index),
/// sorted ascending.
pub fn magnitude_topk(values: &[f64], k: usize) -> Vec<usize> {
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    topk::top_k(&abs, k)
}
