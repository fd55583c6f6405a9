mod common;

use fedrts_core::data::{generate_synthetic, SyntheticSpec};
use fedrts_core::experiment::{parse_config_str, run};
use fedrts_core::fed::{run_federation, AdjusterKind, FederationConfig};
use fedrts_core::rng::{self, tag};
use proptest::prelude::*;

fn data(seed: u64) -> fedrts_core::data::Dataset {
    let spec = SyntheticSpec { classes: 4, features: 10, samples_per_class: 30, spread: 1.0, separation: 3.0 };
    generate_synthetic(&spec, &mut rng::stream(seed, &[tag::DATA])).unwrap()
}

#[test]
fn one_client_federation_equals_centralized_masked_sgd() {
    let config = FederationConfig {
        total_clients: 1,
        clients_per_round: 1,
        rounds: 20,
        // topology never adjusted
        adjust_interval: 21,
        adjust_cutoff: 20,
        local_epochs: 2,
        learning_rate: 0.05,
        batch_size: 8,
        target_density: 0.5,
        hidden_layers: vec![12, 8],
        seed: 11,
        ..Default::default()
    };
    let data = data(3);
    let fed = run_federation(&config, &data).unwrap();
    let (accuracy, loss, model) = common::centralized_masked_sgd(&config, &data);
    let fed_accuracy: Vec<f64> = fed.metrics.iter().map(|m| m.test_accuracy).collect();
    let fed_loss: Vec<f64> = fed.metrics.iter().map(|m| m.train_loss).collect();
    assert_eq!(fed_accuracy, accuracy);
    assert_eq!(
        fed_loss.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
        loss.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
    );
    for (a, b) in fed.model.layers().iter().zip(model.layers()) {
        assert_eq!(a.mask(), b.mask());
        let bits = |xs: &[f64]| xs.iter().map(|x| (x + 0.0).to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(a.weights()), bits(b.weights()));
        assert_eq!(bits(a.bias()), bits(b.bias()));
    }
}

#[test]
fn every_mode_and_adjuster_is_deterministic() {
    let base = "seed = 9\nrounds = 8\ntotal_clients = 8\nclients_per_round = 3\nhidden_layers = 16\n\
                synthetic_features = 8\nsynthetic_samples_per_class = 25\nlocal_epochs = 1\nadjust_interval = 2\n";
    for adjuster in ["tsadj", "cucb", "prune_regrow", "fedavg"] {
        let config = parse_config_str(&format!("mode = federation\n{base}adjuster = {adjuster}\n"), None).unwrap();
        assert_eq!(run(&config).unwrap().csv, run(&config).unwrap().csv, "{adjuster}");
    }
    for policy in ["thompson", "cucb"] {
        let text = format!("mode = bandit\nseed = 4\narms = 20\nk = 5\nhorizon = 500\npolicy = {policy}\n");
        let config = parse_config_str(&text, None).unwrap();
        assert_eq!(run(&config).unwrap().csv, run(&config).unwrap().csv, "{policy}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn density_budget_and_cumulative_costs_hold(
        seed in any::<u64>(),
        density in 0.05f64..0.9,
        interval in 1u64..4,
        adjuster in prop::sample::select(vec![AdjusterKind::TsAdj, AdjusterKind::Cucb, AdjusterKind::PruneRegrow]),
        hidden in prop::collection::vec(4usize..20, 1..3),
    ) {
        let config = FederationConfig {
            total_clients: 6,
            clients_per_round: 3,
            rounds: 6,
            adjust_interval: interval,
            adjust_cutoff: 6,
            local_epochs: 1,
            learning_rate: 0.05,
            batch_size: 8,
            target_density: density,
            hidden_layers: hidden,
            adjuster,
            seed,
            ..Default::default()
        };
        let run = run_federation(&config, &data(seed)).unwrap();
        let mut prev = (0u64, 0u64, 0u64);
        for (i, m) in run.metrics.iter().enumerate() {
            prop_assert_eq!(m.round, i as u64 + 1);
            prop_assert!(m.density <= density);
            prop_assert_eq!(&m.layer_active, &run.budgets);
            prop_assert!((0.0..=1.0).contains(&m.mask_churn));
            let now = (m.upload_bits_cum, m.download_bits_cum, m.flops_cum);
            prop_assert!(now.0 >= prev.0 && now.1 >= prev.1 && now.2 >= prev.2);
            prev = now;
        }
    }
}
