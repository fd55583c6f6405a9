use rand::Rng;

use super::{LayerShape, ModelError};

/// One fully connected layer; weights and mask are row-major `fan_out x fan_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    shape: LayerShape,
    weights: Vec<f64>,
    bias: Vec<f64>,
    mask: Vec<bool>,
    prunable: bool,
}

impl Layer {
    pub fn new(
        shape: LayerShape,
        weights: Vec<f64>,
        bias: Vec<f64>,
        mask: Vec<bool>,
        prunable: bool,
    ) -> Result<Self, ModelError> {
        if weights.len() != shape.len() || mask.len() != shape.len() || bias.len() != shape.fan_out {
            return Err(ModelError::ShapeError(format!(
                "layer {}x{} got {} weights, {} mask entries, {} biases",
                shape.fan_out,
                shape.fan_in,
                weights.len(),
                mask.len(),
                bias.len()
            )));
        }
        let mut layer = Self { shape, weights, bias, mask, prunable };
        layer.apply_mask();
        Ok(layer)
    }

    pub fn shape(&self) -> LayerShape {
        self.shape
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Whether this layer's weights take part in pruning. Output layers and
    /// all biases are always dense.
    pub fn prunable(&self) -> bool {
        self.prunable
    }

    pub fn active_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    fn apply_mask(&mut self) {
        for (w, &m) in self.weights.iter_mut().zip(&self.mask) {
            if !m {
                *w = 0.0;
            }
        }
    }
}

/// Feed-forward network: ReLU between layers, identity on the output.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseModel {
    layers: Vec<Layer>,
}

/// Per-layer outputs of a forward pass. `outputs[l]` is the post-activation
/// output of layer `l`; the last entry holds the logits.
#[derive(Debug, Clone)]
pub struct Forward {
    pub rows: usize,
    pub pre_activations: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

impl Forward {
    pub fn logits(&self) -> &[f64] {
        self.outputs.last().expect("model has at least one layer")
    }
}

/// Dense gradients of every weight and bias, shaped like the model.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl SparseModel {
    /// He-uniform initialised MLP with all-ones masks. Every layer except the
    /// last is prunable.
    pub fn init<R: Rng + ?Sized>(input: usize, hidden: &[usize], classes: usize, rng: &mut R) -> Self {
        let mut dims = vec![input];
        dims.extend_from_slice(hidden);
        dims.push(classes);
        let n = dims.len() - 1;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(l, w)| {
                let shape = LayerShape::new(w[0], w[1]);
                let limit = (6.0 / shape.fan_in as f64).sqrt();
                let weights = (0..shape.len()).map(|_| rng.random_range(-limit..limit)).collect();
                Layer {
                    shape,
                    weights,
                    bias: vec![0.0; shape.fan_out],
                    mask: vec![true; shape.len()],
                    prunable: l + 1 < n,
                }
            })
            .collect();
        Self { layers }
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self, ModelError> {
        if layers.is_empty() {
            return Err(ModelError::ShapeError("model needs at least one layer".into()));
        }
        for (l, pair) in layers.windows(2).enumerate() {
            if pair[0].shape.fan_out != pair[1].shape.fan_in {
                return Err(ModelError::ShapeError(format!(
                    "layer {l} outputs {} but layer {} expects {}",
                    pair[0].shape.fan_out,
                    l + 1,
                    pair[1].shape.fan_in
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].shape.fan_in
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").shape.fan_out
    }

    /// Indices of the prunable layers.
    pub fn prunable_layers(&self) -> Vec<usize> {
        (0..self.layers.len()).filter(|&l| self.layers[l].prunable).collect()
    }

    pub fn prunable_shapes(&self) -> Vec<LayerShape> {
        self.layers.iter().filter(|l| l.prunable).map(|l| l.shape).collect()
    }

    /// Total number of weight parameters, prunable or not.
    pub fn weight_count(&self) -> usize {
        self.layers.iter().map(|l| l.shape.len()).sum()
    }

    pub fn bias_count(&self) -> usize {
        self.layers.iter().map(|l| l.shape.fan_out).sum()
    }

    /// Active weights over all layers (non-prunable layers count in full).
    pub fn active_weight_count(&self) -> usize {
        self.layers.iter().map(Layer::active_count).sum()
    }

    /// Active fraction of the prunable weights; 1.0 when nothing is prunable.
    pub fn density(&self) -> f64 {
        let (active, total) = self
            .layers
            .iter()
            .filter(|l| l.prunable)
            .fold((0usize, 0usize), |(a, t), l| (a + l.active_count(), t + l.shape.len()));
        if total == 0 {
            1.0
        } else {
            active as f64 / total as f64
        }
    }

    /// Zeroes every weight whose mask entry is off. Idempotent.
    pub fn apply_mask(&mut self) {
        for layer in &mut self.layers {
            layer.apply_mask();
        }
    }

    /// Replaces the mask of layer `l` and re-applies it.
    pub fn set_mask(&mut self, l: usize, mask: Vec<bool>) -> Result<(), ModelError> {
        let layer = &mut self.layers[l];
        if mask.len() != layer.shape.len() {
            return Err(ModelError::ShapeError(format!(
                "mask of {} entries for layer {l} of {} weights",
                mask.len(),
                layer.shape.len()
            )));
        }
        layer.mask = mask;
        layer.apply_mask();
        Ok(())
    }

    /// Overwrites all weights and biases (e.g. with an aggregate) and
    /// re-applies the masks.
    pub fn set_parameters(&mut self, weights: &[Vec<f64>], biases: &[Vec<f64>]) -> Result<(), ModelError> {
        if weights.len() != self.layers.len() || biases.len() != self.layers.len() {
            return Err(ModelError::ShapeError("parameter layer count differs from model".into()));
        }
        for (l, layer) in self.layers.iter_mut().enumerate() {
            if weights[l].len() != layer.weights.len() || biases[l].len() != layer.bias.len() {
                return Err(ModelError::ShapeError(format!("parameter shape differs at layer {l}")));
            }
            layer.weights.copy_from_slice(&weights[l]);
            layer.bias.copy_from_slice(&biases[l]);
            layer.apply_mask();
        }
        Ok(())
    }

    /// Mutable access to raw weights of layer `l`. Callers must re-apply the
    /// mask afterwards.
    pub fn weights_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.layers[l].weights
    }

    pub fn bias_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.layers[l].bias
    }

    /// Forward pass over a row-major batch of `rows x input_dim` features.
    pub fn forward(&self, features: &[f64]) -> Result<Forward, ModelError> {
        let width = self.input_dim();
        if features.is_empty() || !features.len().is_multiple_of(width) {
            return Err(ModelError::ShapeError(format!(
                "{} feature values are not a whole number of rows of width {width}",
                features.len()
            )));
        }
        let rows = features.len() / width;
        let last = self.layers.len() - 1;
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut outputs: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            let input: &[f64] = if l == 0 { features } else { &outputs[l - 1] };
            let LayerShape { fan_in, fan_out } = layer.shape;
            let mut z = vec![0.0; rows * fan_out];
            for r in 0..rows {
                let x = &input[r * fan_in..(r + 1) * fan_in];
                let out = &mut z[r * fan_out..(r + 1) * fan_out];
                for (o, zo) in out.iter_mut().enumerate() {
                    let w = &layer.weights[o * fan_in..(o + 1) * fan_in];
                    *zo = layer.bias[o] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                }
            }
            let a = if l == last { z.clone() } else { z.iter().map(|&v| v.max(0.0)).collect() };
            pre_activations.push(z);
            outputs.push(a);
        }
        Ok(Forward { rows, pre_activations, outputs })
    }

    /// Predicted class per row.
    pub fn predict(&self, features: &[f64]) -> Result<Vec<usize>, ModelError> {
        let fwd = self.forward(features)?;
        let classes = self.output_dim();
        Ok(fwd
            .logits()
            .chunks(classes)
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
                    .0
            })
            .collect())
    }

    /// Mean softmax cross-entropy over the batch.
    pub fn loss(&self, features: &[f64], labels: &[usize]) -> Result<f64, ModelError> {
        let fwd = self.forward(features)?;
        self.check_labels(fwd.rows, labels)?;
        let classes = self.output_dim();
        let total: f64 = fwd
            .logits()
            .chunks(classes)
            .zip(labels)
            .map(|(row, &y)| {
                let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
                lse - row[y]
            })
            .sum();
        Ok(total / fwd.rows as f64)
    }

    fn check_labels(&self, rows: usize, labels: &[usize]) -> Result<(), ModelError> {
        if labels.len() != rows {
            return Err(ModelError::ShapeError(format!("{} labels for {rows} rows", labels.len())));
        }
        let classes = self.output_dim();
        if let Some(&label) = labels.iter().find(|&&y| y >= classes) {
            return Err(ModelError::LabelOutOfRange { label, classes });
        }
        Ok(())
    }

    /// Gradient of the mean cross-entropy with respect to every weight
    /// (masked or not) and bias, plus the loss value.
    pub fn backward(&self, features: &[f64], labels: &[usize]) -> Result<(GradientSet, f64), ModelError> {
        let fwd = self.forward(features)?;
        let rows = fwd.rows;
        self.check_labels(rows, labels)?;
        let classes = self.output_dim();
        let inv_rows = 1.0 / rows as f64;

        // delta at the logits: (softmax - one_hot) / rows
        let mut loss = 0.0;
        let mut delta = vec![0.0; rows * classes];
        for r in 0..rows {
            let row = &fwd.logits()[r * classes..(r + 1) * classes];
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = row.iter().map(|v| (v - max).exp()).sum();
            loss += max + sum.ln() - row[labels[r]];
            for c in 0..classes {
                let p = (row[c] - max).exp() / sum;
                let y = if c == labels[r] { 1.0 } else { 0.0 };
                delta[r * classes + c] = (p - y) * inv_rows;
            }
        }
        loss *= inv_rows;

        let n = self.layers.len();
        let mut gw: Vec<Vec<f64>> = vec![Vec::new(); n];
        let mut gb: Vec<Vec<f64>> = vec![Vec::new(); n];
        for l in (0..n).rev() {
            let layer = &self.layers[l];
            let LayerShape { fan_in, fan_out } = layer.shape;
            let input: &[f64] = if l == 0 { features } else { &fwd.outputs[l - 1] };
            let mut g = vec![0.0; fan_out * fan_in];
            let mut b = vec![0.0; fan_out];
            for r in 0..rows {
                let x = &input[r * fan_in..(r + 1) * fan_in];
                for o in 0..fan_out {
                    let d = delta[r * fan_out + o];
                    if d == 0.0 {
                        continue;
                    }
                    b[o] += d;
                    for (gi, xi) in g[o * fan_in..(o + 1) * fan_in].iter_mut().zip(x) {
                        *gi += d * xi;
                    }
                }
            }
            if l > 0 {
                let z_prev = &fwd.pre_activations[l - 1];
                let mut next = vec![0.0; rows * fan_in];
                for r in 0..rows {
                    let np = &mut next[r * fan_in..(r + 1) * fan_in];
                    for o in 0..fan_out {
                        let d = delta[r * fan_out + o];
                        if d == 0.0 {
                            continue;
                        }
                        for (ni, wi) in np.iter_mut().zip(&layer.weights[o * fan_in..(o + 1) * fan_in]) {
                            *ni += d * wi;
                        }
                    }
                    for (ni, &z) in np.iter_mut().zip(&z_prev[r * fan_in..(r + 1) * fan_in]) {
                        if z <= 0.0 {
                            *ni = 0.0;
                        }
                    }
                }
                delta = next;
            }
            gw[l] = g;
            gb[l] = b;
        }
        Ok((GradientSet { weights: gw, biases: gb }, loss))
    }

    /// Masked SGD step: `W -= lr * (G ⊙ m)`, `b -= lr * g_b`.
    pub fn sgd_step(&mut self, grads: &GradientSet, lr: f64) {
        for (l, layer) in self.layers.iter_mut().enumerate() {
            for ((w, &m), g) in layer.weights.iter_mut().zip(&layer.mask).zip(&grads.weights[l]) {
                if m {
                    *w -= lr * g;
                }
            }
            for (b, g) in layer.bias.iter_mut().zip(&grads.biases[l]) {
                *b -= lr * g;
            }
        }
    }
}
