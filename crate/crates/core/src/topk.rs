//! Top-k selection with a deterministic tie-break.
//!
//! All rankings in the crate order by score descending and break ties by the
//! lowest index. NaN scores compare via `f64::total_cmp`.

use std::cmp::Ordering;

fn rank(scores: &[f64], a: usize, b: usize) -> Ordering {
    scores[b].total_cmp(&scores[a]).then(a.cmp(&b))
}

/// Indices of the `k` largest scores, ordered by rank (best first).
///
/// Panics if `k > scores.len()`.
pub fn top_k_ranked(scores: &[f64], k: usize) -> Vec<usize> {
    assert!(k <= scores.len(), "k={k} exceeds {} scores", scores.len());
    if k == 0 {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, |&a, &b| rank(scores, a, b));
        idx.truncate(k);
    }
    idx.sort_unstable_by(|&a, &b| rank(scores, a, b));
    idx
}

/// Indices of the `k` largest scores, sorted ascending by index.
pub fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx = top_k_ranked(scores, k);
    idx.sort_unstable();
    idx
}

/// Top-k over a subset of candidate positions; returns positions from
/// `candidates`, sorted ascending.
pub fn top_k_among(scores: &[f64], candidates: &[usize], k: usize) -> Vec<usize> {
    let sub: Vec<f64> = candidates.iter().map(|&i| scores[i]).collect();
    let mut out: Vec<usize> = top_k(&sub, k).into_iter().map(|j| candidates[j]).collect();
    out.sort_unstable();
    out
}
