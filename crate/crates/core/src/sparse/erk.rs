use super::{LayerShape, ModelError};

/// Erdős–Rényi layer densities for fully connected layers.
///
/// Density of layer `l` is proportional to `(fan_in + fan_out) / (fan_in *
/// fan_out)`, scaled so the expected number of active weights equals
/// `target * total`. Layers whose scaled density exceeds 1 are made dense and
/// the remaining budget is re-solved over the other layers until stable.
pub fn erk_allocate(shapes: &[LayerShape], target: f64) -> Result<Vec<f64>, ModelError> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(ModelError::InvalidDensity(target));
    }
    if shapes.is_empty() {
        return Err(ModelError::InfeasibleDensity("no prunable layers".into()));
    }
    let total: f64 = shapes.iter().map(|s| s.len() as f64).sum();
    let budget = target * total;
    let raw: Vec<f64> = shapes.iter().map(|s| (s.fan_in + s.fan_out) as f64 / s.len() as f64).collect();
    let mut dense = vec![false; shapes.len()];

    loop {
        let dense_weights: f64 = shapes.iter().zip(&dense).filter(|(_, &d)| d).map(|(s, _)| s.len() as f64).sum();
        let free_mass: f64 =
            shapes.iter().zip(&raw).zip(&dense).filter(|(_, &d)| !d).map(|((s, &r), _)| r * s.len() as f64).sum();
        if free_mass == 0.0 {
            // Every layer is dense.
            if dense_weights + 0.5 < budget {
                return Err(ModelError::InfeasibleDensity(format!(
                    "all layers dense ({dense_weights} weights) but budget is {budget}"
                )));
            }
            return Ok(vec![1.0; shapes.len()]);
        }
        let scale = (budget - dense_weights) / free_mass;
        if scale <= 0.0 {
            return Err(ModelError::InfeasibleDensity(format!(
                "dense layers alone exceed the budget of {budget} weights"
            )));
        }
        let mut changed = false;
        for (l, &r) in raw.iter().enumerate() {
            if !dense[l] && scale * r > 1.0 {
                dense[l] = true;
                changed = true;
            }
        }
        if !changed {
            return Ok(raw.iter().zip(&dense).map(|(&r, &d)| if d { 1.0 } else { scale * r }).collect());
        }
    }
}

/// Integer active-weight counts for each layer.
///
/// Each count is `round(density * len)` clamped to `[1, len]`; if rounding
/// pushes the total above `floor(target * total)` the layers that were
/// rounded up the most give back one weight each (lowest index first on
/// ties) so the global density never exceeds `target`.
pub fn layer_budgets(shapes: &[LayerShape], densities: &[f64], target: f64) -> Result<Vec<usize>, ModelError> {
    if shapes.len() != densities.len() {
        return Err(ModelError::ShapeError(format!("{} shapes but {} densities", shapes.len(), densities.len())));
    }
    let total: usize = shapes.iter().map(LayerShape::len).sum();
    let cap = (target * total as f64 + 1e-9).floor() as usize;
    let mut counts: Vec<usize> =
        shapes.iter().zip(densities).map(|(s, &d)| ((d * s.len() as f64).round() as usize).clamp(1, s.len())).collect();
    while counts.iter().sum::<usize>() > cap {
        let excess = |l: usize| counts[l] as f64 - densities[l] * shapes[l].len() as f64;
        let victim = (0..counts.len())
            .filter(|&l| counts[l] > 1)
            .max_by(|&a, &b| excess(a).total_cmp(&excess(b)).then(b.cmp(&a)));
        match victim {
            Some(l) => counts[l] -= 1,
            None => {
                return Err(ModelError::InfeasibleDensity(format!(
                    "target {target} leaves fewer than one weight per layer"
                )))
            }
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_layer_takes_the_target() {
        let d = erk_allocate(&[LayerShape::new(30, 7)], 0.3).unwrap();
        assert!((d[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn full_density_is_dense() {
        let shapes = [LayerShape::new(10, 20), LayerShape::new(20, 5)];
        assert_eq!(erk_allocate(&shapes, 1.0).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn clamped_layer_redistributes_budget() {
        // Hand evaluation: budget 0.2 * (200704 + 2560) = 40652.8 weights. The
        // 256->10 layer saturates, leaving (40652.8 - 2560) / 200704 for the
        // 784->256 layer.
        let shapes = [LayerShape::new(784, 256), LayerShape::new(256, 10)];
        let d = erk_allocate(&shapes, 0.2).unwrap();
        assert_eq!(d[1], 1.0);
        assert!((d[0] - 0.189_796).abs() < 1e-5, "{}", d[0]);
        assert!((d[0] - (40652.8 - 2560.0) / 200704.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_targets() {
        let shapes = [LayerShape::new(3, 3)];
        assert_eq!(erk_allocate(&shapes, 0.0), Err(ModelError::InvalidDensity(0.0)));
        assert_eq!(erk_allocate(&shapes, 1.5), Err(ModelError::InvalidDensity(1.5)));
        assert!(matches!(erk_allocate(&[], 0.5), Err(ModelError::InfeasibleDensity(_))));
    }

    #[test]
    fn budgets_never_exceed_target() {
        let shapes = [LayerShape::new(3, 3), LayerShape::new(3, 3)];
        // round(4.5) = 5 twice would give 10 > floor(9); the lower index gives one back.
        let counts = layer_budgets(&shapes, &[0.5, 0.5], 0.5).unwrap();
        assert_eq!(counts, vec![4, 5]);
    }

    proptest! {
        #[test]
        fn erk_meets_global_budget(
            dims in proptest::collection::vec((1usize..200, 1usize..200), 1..5),
            target in 0.01f64..=1.0,
        ) {
            let shapes: Vec<LayerShape> = dims.iter().map(|&(i, o)| LayerShape::new(i, o)).collect();
            let d = erk_allocate(&shapes, target).unwrap();
            let total: f64 = shapes.iter().map(|s| s.len() as f64).sum();
            let used: f64 = shapes.iter().zip(&d).map(|(s, &x)| x * s.len() as f64).sum();
            prop_assert!(d.iter().all(|&x| x > 0.0 && x <= 1.0));
            prop_assert!((used - target * total).abs() < 1e-6 * total.max(1.0));
            if let Ok(counts) = layer_budgets(&shapes, &d, target) {
                let n: usize = counts.iter().sum();
                prop_assert!(n as f64 <= target * total + 1e-9);
                prop_assert!(target * total - (n as f64) < shapes.len() as f64 + 1.0);
            }
        }
    }
}
