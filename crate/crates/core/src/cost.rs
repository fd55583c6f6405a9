//! Sparse storage sizing and per-round communication/FLOPs accounting.
//!
//! A tensor of `n` elements with `m` non-zeros at `b` bits per value is stored
//! with the scheme assigned to its density band:
//!
//! | density      | scheme    | position bits `o`                               |
//! |--------------|-----------|-------------------------------------------------|
//! | `[0.9, 1]`   | dense     | none (`s = n*b`)                                |
//! | `[0.3, 0.9)` | bitmap    | `n`                                             |
//! | `[0.1, 0.3)` | COO       | `m * clog2(n)`                                  |
//! | `[0, 0.1)`   | CSR/CSC   | `m * clog2(cols) + rows * clog2(m)` (or transposed, whichever is smaller) |
//!
//! and `s = o + m*b` for the sparse schemes. `clog2(x)` is 0 for `x <= 1`.
//! Band membership is decided in exact integer arithmetic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparse::SparseModel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("local epochs must be at least 1")]
    InvalidEpochs,
    #[error("invalid tensor spec: {0}")]
    InvalidSpec(String),
}

/// Default value width.
pub const VALUE_BITS: u64 = 32;

/// `ceil(log2(x))`, with `clog2(0) = clog2(1) = 0`.
pub fn clog2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        u64::from(64 - (x - 1).leading_zeros())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorStorageSpec {
    pub rows: u64,
    pub cols: u64,
    pub nonzeros: u64,
    pub value_bits: u64,
}

impl TensorStorageSpec {
    pub fn new(rows: u64, cols: u64, nonzeros: u64, value_bits: u64) -> Result<Self, CostError> {
        if rows == 0 || cols == 0 {
            return Err(CostError::InvalidSpec("tensor must have at least one element".into()));
        }
        if nonzeros > rows * cols {
            return Err(CostError::InvalidSpec(format!("{nonzeros} non-zeros in {} elements", rows * cols)));
        }
        Ok(Self { rows, cols, nonzeros, value_bits })
    }

    pub fn elements(&self) -> u64 {
        self.rows * self.cols
    }

    pub fn density(&self) -> f64 {
        self.nonzeros as f64 / self.elements() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageScheme {
    Dense,
    Bitmap,
    Coo,
    Csr,
    Csc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageSize {
    pub scheme: StorageScheme,
    pub position_bits: u64,
    pub total_bits: u64,
}

/// Storage size of one tensor under the density-banded scheme table.
pub fn storage_size(spec: &TensorStorageSpec) -> StorageSize {
    let n = spec.elements();
    let m = spec.nonzeros;
    let b = spec.value_bits;
    // d >= x/10  <=>  10 m >= x n
    let at_least = |tenths: u64| 10 * m >= tenths * n;
    let (scheme, position_bits) = if at_least(9) {
        return StorageSize { scheme: StorageScheme::Dense, position_bits: 0, total_bits: n * b };
    } else if at_least(3) {
        (StorageScheme::Bitmap, n)
    } else if at_least(1) {
        (StorageScheme::Coo, m * clog2(n))
    } else {
        let csr = m * clog2(spec.cols) + spec.rows * clog2(m);
        let csc = m * clog2(spec.rows) + spec.cols * clog2(m);
        if csc < csr {
            (StorageScheme::Csc, csc)
        } else {
            (StorageScheme::Csr, csr)
        }
    };
    StorageSize { scheme, position_bits, total_bits: position_bits + m * b }
}

/// Dense and sparse storage bits of a whole model: `(O_d, O_s)`. Biases and
/// non-prunable layers are dense in both.
pub fn model_storage_bits(model: &SparseModel, value_bits: u64) -> (u64, u64) {
    let biases = model.bias_count() as u64 * value_bits;
    let dense = model.weight_count() as u64 * value_bits + biases;
    let sparse = model
        .layers()
        .iter()
        .map(|layer| {
            let s = layer.shape();
            let spec = TensorStorageSpec {
                rows: s.fan_out as u64,
                cols: s.fan_in as u64,
                nonzeros: layer.active_count() as u64,
                value_bits,
            };
            storage_size(&spec).total_bits
        })
        .sum::<u64>()
        + biases;
    (dense, sparse)
}

/// Storage of a top-gradient upload (`O_xi`), kept as its index and value
/// halves. Entries are addressed COO-style within their layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GradientPayload {
    pub index_bits: u64,
    pub value_bits: u64,
}

impl GradientPayload {
    /// `entries` is `(layer_elements, entry_count)` per layer.
    pub fn coo(entries: impl IntoIterator<Item = (u64, u64)>, value_bits: u64) -> Self {
        entries.into_iter().fold(Self::default(), |acc, (elements, count)| Self {
            index_bits: acc.index_bits + count * clog2(elements),
            value_bits: acc.value_bits + count * value_bits,
        })
    }

    pub fn total_bits(&self) -> u64 {
        self.index_bits + self.value_bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FedAvg,
    FedRts,
    DeterministicBaseline,
    FedCucb,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::FedAvg => "FedAVG",
            Method::FedRts => "FedRTS",
            Method::DeterministicBaseline => "PruneRegrow",
            Method::FedCucb => "FedCUCB",
        }
    }
}

/// Per-client `(upload_bits, download_bits)` of one round.
///
/// FedAVG moves the dense model both ways. Sparse methods move the sparse
/// model both ways; on outer rounds the upload additionally carries the
/// top-gradient indices only (the value half of `O_xi` is never sent).
pub fn round_comm_cost(
    method: Method,
    is_outer: bool,
    dense_bits: u64,
    sparse_bits: u64,
    payload: &GradientPayload,
) -> (u64, u64) {
    match method {
        Method::FedAvg => (dense_bits, dense_bits),
        Method::FedRts | Method::DeterministicBaseline | Method::FedCucb => {
            let extra = if is_outer { payload.index_bits } else { 0 };
            (sparse_bits + extra, sparse_bits)
        }
    }
}

/// Training FLOPs of one client-round, given forward costs `F_d` (dense) and
/// `F_s` (masked) for one pass over the local data.
///
/// FedAVG: `3 F_d E`. Sparse methods: `3 F_s E` on inner rounds and
/// `3 F_s (E-1) + F_s + 2 F_d` on outer rounds, where the last pass
/// back-propagates densely.
pub fn round_flops(method: Method, is_outer: bool, dense: u64, sparse: u64, epochs: u64) -> Result<u64, CostError> {
    if epochs < 1 {
        return Err(CostError::InvalidEpochs);
    }
    Ok(match method {
        Method::FedAvg => 3 * dense * epochs,
        _ if is_outer => 3 * sparse * (epochs - 1) + sparse + 2 * dense,
        _ => 3 * sparse * epochs,
    })
}

/// Forward-pass FLOPs per sample: `(dense, sparse)`, two per weight
/// (multiply and add), counting active weights only for the sparse figure.
pub fn forward_flops_per_sample(model: &SparseModel) -> (u64, u64) {
    (2 * model.weight_count() as u64, 2 * model.active_weight_count() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostRecord {
    pub round: u64,
    pub upload_bits: u64,
    pub download_bits: u64,
    pub train_flops: u64,
}

/// Per-round cost records with running totals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostLedger {
    records: Vec<CostRecord>,
    totals: CostTotals,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostTotals {
    pub upload_bits: u64,
    pub download_bits: u64,
    pub train_flops: u64,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, record: CostRecord) -> CostTotals {
        self.totals.upload_bits += record.upload_bits;
        self.totals.download_bits += record.download_bits;
        self.totals.train_flops += record.train_flops;
        self.records.push(record);
        self.totals
    }

    pub fn records(&self) -> &[CostRecord] {
        &self.records
    }

    pub fn totals(&self) -> CostTotals {
        self.totals
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn size(rows: u64, cols: u64, m: u64) -> StorageSize {
        storage_size(&TensorStorageSpec::new(rows, cols, m, 32).unwrap())
    }

    #[test]
    fn clog2_values() {
        assert_eq!([0, 1, 2, 3, 4, 5, 1024, 1025].map(clog2), [0, 0, 1, 2, 2, 3, 10, 11]);
    }

    #[test]
    fn hand_computed_sizes() {
        let dense = size(1, 1000, 950);
        assert_eq!((dense.scheme, dense.total_bits), (StorageScheme::Dense, 32_000));

        let coo = size(32, 32, 205);
        assert_eq!((coo.scheme, coo.position_bits, coo.total_bits), (StorageScheme::Coo, 2050, 8610));

        // 100x100, 500 non-zeros: o = 500*clog2(100) + 100*clog2(500) = 3500 + 900
        let csr = size(100, 100, 500);
        assert_eq!((csr.scheme, csr.position_bits, csr.total_bits), (StorageScheme::Csr, 4400, 20_400));
    }

    #[test]
    fn empty_tensor_costs_nothing() {
        let s = size(10, 10, 0);
        assert_eq!((s.scheme, s.total_bits), (StorageScheme::Csr, 0));
    }

    #[test]
    fn csc_chosen_for_tall_matrices() {
        // 1000x10, 50 nnz: csr o = 50*4 + 1000*6, csc o = 50*10 + 10*6
        let s = size(1000, 10, 50);
        assert_eq!((s.scheme, s.position_bits), (StorageScheme::Csc, 560));
    }

    #[test]
    fn band_edges() {
        assert_eq!(size(100, 100, 9000).scheme, StorageScheme::Dense);
        assert_eq!(size(100, 100, 8999).scheme, StorageScheme::Bitmap);
        assert_eq!(size(100, 100, 3000).scheme, StorageScheme::Bitmap);
        assert_eq!(size(100, 100, 2999).scheme, StorageScheme::Coo);
        assert_eq!(size(100, 100, 1000).scheme, StorageScheme::Coo);
        assert_eq!(size(100, 100, 999).scheme, StorageScheme::Csr);
    }

    #[test]
    fn bitmap_beats_coo_at_its_lower_edge() {
        let bitmap = size(100, 100, 3000).total_bits;
        let coo_same_m = 3000 * clog2(10_000) + 3000 * 32;
        assert!(bitmap <= coo_same_m);
    }

    #[test]
    fn monotone_within_each_band() {
        for m in 1..10_000u64 {
            let a = size(100, 100, m - 1);
            let b = size(100, 100, m);
            if a.scheme == b.scheme {
                assert!(a.total_bits <= b.total_bits, "m={m}");
            }
        }
    }

    #[test]
    fn communication_examples() {
        let payload = GradientPayload { index_bits: 700, value_bits: 1600 };
        assert_eq!(round_comm_cost(Method::FedRts, false, 1000, 400, &payload), (400, 400));
        assert_eq!(round_comm_cost(Method::FedRts, true, 1000, 400, &payload), (1100, 400));
        assert_eq!(round_comm_cost(Method::FedAvg, true, 1000, 400, &payload), (1000, 1000));
        assert_eq!(
            round_comm_cost(Method::FedRts, false, 1000, 1000, &payload),
            round_comm_cost(Method::FedAvg, false, 1000, 1000, &payload)
        );
        assert_eq!(round_comm_cost(Method::FedCucb, true, 1000, 400, &payload).0, 1100);
    }

    #[test]
    fn payload_index_half() {
        let p = GradientPayload::coo([(1024, 10), (100, 5)], 32);
        assert_eq!(p.index_bits, 10 * 10 + 5 * 7);
        assert_eq!(p.value_bits, 15 * 32);
    }

    #[test]
    fn flops_examples() {
        assert_eq!(round_flops(Method::FedAvg, false, 100, 30, 5).unwrap(), 1500);
        assert_eq!(round_flops(Method::FedRts, true, 100, 30, 1).unwrap(), 30 + 200);
        assert_eq!(round_flops(Method::FedRts, true, 100, 30, 5).unwrap(), 3 * 30 * 4 + 30 + 200);
        assert_eq!(round_flops(Method::FedRts, false, 100, 30, 5).unwrap(), 450);
        assert_eq!(round_flops(Method::FedRts, true, 100, 100, 5).unwrap(), 1500);
        assert_eq!(round_flops(Method::FedRts, true, 100, 30, 0), Err(CostError::InvalidEpochs));
    }

    #[test]
    fn ledger_totals() {
        let mut l = CostLedger::new();
        l.record(CostRecord { round: 1, upload_bits: 5, download_bits: 7, train_flops: 11 });
        let t = l.record(CostRecord { round: 2, upload_bits: 1, download_bits: 2, train_flops: 3 });
        assert_eq!(t, CostTotals { upload_bits: 6, download_bits: 9, train_flops: 14 });
    }
}
