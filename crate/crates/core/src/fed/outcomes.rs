use super::FedError;
use crate::cmab::OutcomeVector;
use crate::topk;

/// Aggregated and per-client outcomes, one [`OutcomeVector`] per prunable
/// layer. `clients[n][j]` belongs to the `n`-th participating client.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerOutcomes {
    pub aggregate: Vec<OutcomeVector>,
    pub clients: Vec<Vec<OutcomeVector>>,
}

fn active_positions(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect()
}

/// Active links ranked by weight magnitude: 1 for the top `kappa`, 0 for the
/// rest; inactive links unobserved.
fn semi_layer(weights: &[f64], mask: &[bool], kappa: usize) -> OutcomeVector {
    let active = active_positions(mask);
    let magnitude: Vec<f64> = weights.iter().map(|w| w.abs()).collect();
    let mut x = OutcomeVector::unobserved(mask.len());
    for &i in &active {
        x.set(i, 0.0);
    }
    for i in topk::top_k_among(&magnitude, &active, kappa.min(active.len())) {
        x.set(i, 1.0);
    }
    x
}

/// Semi-outcomes over the active links of every prunable layer, from the
/// aggregated weights and from each client's weights.
pub fn compute_semi_outcomes(
    aggregate: &[&[f64]],
    clients: &[Vec<&[f64]>],
    masks: &[&[bool]],
    kappas: &[usize],
) -> LayerOutcomes {
    let per = |weights: &[&[f64]]| -> Vec<OutcomeVector> {
        weights.iter().zip(masks).zip(kappas).map(|((w, m), &k)| semi_layer(w, m, k)).collect()
    };
    LayerOutcomes { aggregate: per(aggregate), clients: clients.iter().map(|c| per(c)).collect() }
}

/// Extends semi-outcomes to every link. Inactive links get an aggregated
/// outcome of 0.5 and a client outcome of 1 iff the client listed them among
/// its top-gradient indices for that layer.
pub fn compute_full_outcomes(
    semi: &LayerOutcomes,
    gradient_indices: &[Option<Vec<Vec<usize>>>],
    masks: &[&[bool]],
) -> Result<LayerOutcomes, FedError> {
    if gradient_indices.len() != semi.clients.len() {
        return Err(FedError::Inconsistent(format!(
            "{} gradient index sets for {} clients",
            gradient_indices.len(),
            semi.clients.len()
        )));
    }
    let aggregate = semi
        .aggregate
        .iter()
        .zip(masks)
        .map(|(x, mask)| {
            let mut x = x.clone();
            for (i, _) in mask.iter().enumerate().filter(|(_, &m)| !m) {
                x.set(i, 0.5);
            }
            x
        })
        .collect();
    let mut clients = Vec::with_capacity(semi.clients.len());
    for (n, (layers, indices)) in semi.clients.iter().zip(gradient_indices).enumerate() {
        let indices = indices.as_ref().ok_or(FedError::MissingGradientIndices(n))?;
        let full: Vec<OutcomeVector> = layers
            .iter()
            .zip(masks)
            .zip(indices)
            .map(|((x, mask), picked)| {
                let mut x = x.clone();
                for (i, _) in mask.iter().enumerate().filter(|(_, &m)| !m) {
                    x.set(i, 0.0);
                }
                for &i in picked {
                    if !mask[i] {
                        x.set(i, 1.0);
                    }
                }
                x
            })
            .collect();
        clients.push(full);
    }
    Ok(LayerOutcomes { aggregate, clients })
}

/// `X = gamma X_agg + (1 - gamma) sum_n p_n X_n`, elementwise.
///
/// Sources that did not observe an arm are left out and the remaining
/// weights renormalised; an arm no source observed stays unobserved.
pub fn fuse_outcomes(
    aggregate: &OutcomeVector,
    clients: &[OutcomeVector],
    weights: &[f64],
    gamma: f64,
) -> OutcomeVector {
    let mut fused = OutcomeVector::unobserved(aggregate.len());
    for i in 0..aggregate.len() {
        let mut num = 0.0;
        let mut den = 0.0;
        if let Some(x) = aggregate.get(i) {
            num += gamma * x;
            den += gamma;
        }
        for (c, &p) in clients.iter().zip(weights) {
            if let Some(x) = c.get(i) {
                num += (1.0 - gamma) * p * x;
                den += (1.0 - gamma) * p;
            }
        }
        if den > 0.0 {
            fused.set(i, (num / den).clamp(0.0, 1.0));
        }
    }
    fused
}

/// Fuses every prunable layer.
pub(crate) fn fuse_layers(outcomes: &LayerOutcomes, weights: &[f64], gamma: f64) -> Vec<OutcomeVector> {
    (0..outcomes.aggregate.len())
        .map(|j| {
            let clients: Vec<OutcomeVector> = outcomes.clients.iter().map(|c| c[j].clone()).collect();
            fuse_outcomes(&outcomes.aggregate[j], &clients, weights, gamma)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(v: &[Option<f64>]) -> OutcomeVector {
        OutcomeVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn semi_top_kappa() {
        let w = [0.9, 0.0, -0.1, 0.5];
        let mask = [true, false, true, true];
        assert_eq!(semi_layer(&w, &mask, 2), ov(&[Some(1.0), None, Some(0.0), Some(1.0)]));
        assert_eq!(semi_layer(&w, &mask, 3), ov(&[Some(1.0), None, Some(1.0), Some(1.0)]));
        assert_eq!(semi_layer(&w, &mask, 0), ov(&[Some(0.0), None, Some(0.0), Some(0.0)]));
    }

    #[test]
    fn full_outcomes_fill_inactive_links() {
        let w: &[f64] = &[0.9, 0.0, 0.1, 0.0];
        let mask: &[bool] = &[true, false, true, false];
        let semi = compute_semi_outcomes(&[w], &[vec![w], vec![w]], &[mask], &[1]);
        let idx = vec![Some(vec![vec![1]]), Some(vec![vec![1, 3]])];
        let full = compute_full_outcomes(&semi, &idx, &[mask]).unwrap();
        assert_eq!(full.aggregate[0], ov(&[Some(1.0), Some(0.5), Some(0.0), Some(0.5)]));
        assert_eq!(full.clients[0][0], ov(&[Some(1.0), Some(1.0), Some(0.0), Some(0.0)]));
        assert_eq!(full.clients[1][0], ov(&[Some(1.0), Some(1.0), Some(0.0), Some(1.0)]));

        let fused = fuse_outcomes(
            &full.aggregate[0],
            &[full.clients[0][0].clone(), full.clients[1][0].clone()],
            &[0.5, 0.5],
            0.5,
        );
        // arm 1 voted by everyone: 0.5*0.5 + 0.5*1 = 0.75; arm 3 by half: 0.25 + 0.25 = 0.5
        assert_eq!(fused, ov(&[Some(1.0), Some(0.75), Some(0.0), Some(0.5)]));
    }

    #[test]
    fn unvoted_inactive_arm_fuses_to_quarter() {
        let agg = ov(&[Some(0.5)]);
        let fused = fuse_outcomes(&agg, &[ov(&[Some(0.0)]), ov(&[Some(0.0)])], &[0.3, 0.7], 0.5);
        assert_eq!(fused.get(0), Some(0.25));
    }

    #[test]
    fn missing_indices_rejected() {
        let w: &[f64] = &[1.0, 0.0];
        let mask: &[bool] = &[true, false];
        let semi = compute_semi_outcomes(&[w], &[vec![w]], &[mask], &[1]);
        assert!(matches!(compute_full_outcomes(&semi, &[None], &[mask]), Err(FedError::MissingGradientIndices(0))));
    }

    #[test]
    fn fusion_examples() {
        let agg = ov(&[Some(1.0), Some(0.0), None]);
        let c1 = ov(&[Some(0.0), Some(1.0), None]);
        assert_eq!(fuse_outcomes(&agg, std::slice::from_ref(&c1), &[1.0], 1.0), agg);
        assert_eq!(fuse_outcomes(&agg, std::slice::from_ref(&c1), &[1.0], 0.0), c1);
        let c2 = ov(&[Some(1.0), Some(1.0), None]);
        let c3 = ov(&[Some(0.0), Some(1.0), None]);
        let x = fuse_outcomes(&agg, &[c2, c3], &[0.5, 0.5], 0.5);
        assert_eq!(x.get(0), Some(0.75));
        assert_eq!(x.get(2), None);
    }
}
