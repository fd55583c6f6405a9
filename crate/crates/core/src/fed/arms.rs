use crate::sparse::SparseModel;

/// Bijection between flat arm indices and `(layer, row, col)` positions of
/// the prunable weights. Arms of prunable layer `j` occupy
/// `ranges()[j]`; within a layer, arms follow the row-major weight order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArmIndexMap {
    layers: Vec<usize>,
    cols: Vec<usize>,
    starts: Vec<usize>,
    total: usize,
}

impl ArmIndexMap {
    pub fn new(model: &SparseModel) -> Self {
        let mut layers = Vec::new();
        let mut cols = Vec::new();
        let mut starts = Vec::new();
        let mut total = 0;
        for l in model.prunable_layers() {
            let shape = model.layers()[l].shape();
            layers.push(l);
            cols.push(shape.fan_in);
            starts.push(total);
            total += shape.len();
        }
        Self { layers, cols, starts, total }
    }

    pub fn arm_count(&self) -> usize {
        self.total
    }

    /// Model layer index of each prunable layer.
    pub fn model_layers(&self) -> &[usize] {
        &self.layers
    }

    pub fn ranges(&self) -> Vec<std::ops::Range<usize>> {
        (0..self.layers.len()).map(|j| self.starts[j]..self.starts.get(j + 1).copied().unwrap_or(self.total)).collect()
    }

    /// `(model layer, row, col)` of a flat arm index.
    pub fn locate(&self, arm: usize) -> Option<(usize, usize, usize)> {
        if arm >= self.total {
            return None;
        }
        let j = self.starts.partition_point(|&s| s <= arm) - 1;
        let local = arm - self.starts[j];
        Some((self.layers[j], local / self.cols[j], local % self.cols[j]))
    }

    pub fn flat(&self, layer: usize, row: usize, col: usize) -> Option<usize> {
        let j = self.layers.iter().position(|&l| l == layer)?;
        let range = self.ranges()[j].clone();
        let arm = self.starts[j] + row * self.cols[j] + col;
        (col < self.cols[j] && range.contains(&arm)).then_some(arm)
    }
}
