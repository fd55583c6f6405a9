mod common;

use fedrts_core::rng;
use fedrts_core::sparse::SparseModel;
use rand::Rng;

fn batch(seed: u64, dim: usize, classes: usize, rows: usize) -> (Vec<f64>, Vec<usize>) {
    let mut r = rng::stream(seed, &[99]);
    let features = (0..rows * dim).map(|_| r.random_range(-1.0..1.0)).collect();
    let labels = (0..rows).map(|_| r.random_range(0..classes)).collect();
    (features, labels)
}

#[test]
fn backprop_matches_finite_differences() {
    // 6-10-8-4: 188 weights, 22 biases
    for seed in 0..5 {
        let mut model = SparseModel::init(6, &[10, 8], 4, &mut rng::stream(seed, &[1]));
        let mut r = rng::stream(seed, &[2]);
        for l in model.prunable_layers() {
            let len = model.layers()[l].weights().len();
            model.set_mask(l, (0..len).map(|_| r.random_bool(0.6)).collect()).unwrap();
        }
        // nonzero biases keep pre-activations off the ReLU kink at 0
        for l in 0..model.layers().len() {
            for b in model.bias_mut(l) {
                *b = r.random_range(-0.5..0.5);
            }
        }
        assert!(model.weight_count() + model.bias_count() <= 1000);
        let (features, labels) = batch(seed, 6, 4, 7);
        let worst = common::gradient_check(&model, &features, &labels, 1e-4, 1e-4);
        assert!(worst < 1e-5, "seed {seed}: max relative error {worst:e}");
    }
}

#[test]
fn single_layer_gradients_match() {
    let model = SparseModel::init(5, &[], 3, &mut rng::stream(3, &[1]));
    let (features, labels) = batch(3, 5, 3, 4);
    assert!(common::gradient_check(&model, &features, &labels, 1e-4, 1e-4) < 1e-5);
}
