use super::{DatasetSource, ExperimentConfig};
use crate::cmab::{run_bandit_experiment, BanditEnvironment, BanditRun};
use crate::data::{generate_synthetic, load_dataset, Dataset};
use crate::fed::{run_federation, FederationRun};
use crate::rng::{self, tag};
use crate::Result;

pub const FEDERATION_HEADER: [&str; 8] = [
    "round",
    "test_accuracy",
    "train_loss",
    "density",
    "mask_churn",
    "upload_bits_cum",
    "download_bits_cum",
    "flops_cum",
];
pub const BANDIT_HEADER: [&str; 3] = ["t", "cumulative_regret", "optimal_play_rate"];

/// Rounds at the end of a bandit run over which the summary optimal-play
/// rate is measured.
pub(crate) const BANDIT_TAIL: usize = 2000;

/// Result of one experiment: the full metrics CSV and a one-line summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub csv: String,
    pub summary: String,
    pub rows: usize,
}

/// Materialises the dataset for `seed`.
pub fn load_data(source: &DatasetSource, seed: u64) -> Result<Dataset> {
    Ok(match source {
        DatasetSource::Synthetic(spec) => generate_synthetic(spec, &mut rng::stream(seed, &[tag::DATA]))?,
        DatasetSource::Csv(path) => load_dataset(path)?,
    })
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = writer.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ascii"))
}

pub fn federation_csv(run: &FederationRun) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FEDERATION_HEADER).map_err(std::io::Error::from)?;
    for m in &run.metrics {
        w.write_record([
            m.round.to_string(),
            m.test_accuracy.to_string(),
            m.train_loss.to_string(),
            m.density.to_string(),
            m.mask_churn.to_string(),
            m.upload_bits_cum.to_string(),
            m.download_bits_cum.to_string(),
            m.flops_cum.to_string(),
        ])
        .map_err(std::io::Error::from)?;
    }
    finish(w)
}

/// One row per round; `optimal_play_rate` is the fraction of rounds `1..=t`
/// that played the optimal super arm.
pub fn bandit_csv(run: &BanditRun) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BANDIT_HEADER).map_err(std::io::Error::from)?;
    let mut regret = 0.0;
    let mut hits = 0usize;
    for (i, (gap, &opt)) in run.tracker.per_round_gap().iter().zip(&run.optimal_played).enumerate() {
        regret += gap;
        hits += usize::from(opt);
        let t = i + 1;
        w.write_record([t.to_string(), regret.to_string(), (hits as f64 / t as f64).to_string()])
            .map_err(std::io::Error::from)?;
    }
    finish(w)
}

pub(crate) fn run_federation_seed(config: &ExperimentConfig, seed: u64) -> Result<FederationRun> {
    let data = load_data(&config.dataset, seed)?;
    let fed = crate::fed::FederationConfig { seed, ..config.federation.clone() };
    Ok(run_federation(&fed, &data)?)
}

pub(crate) fn run_bandit_seed(config: &ExperimentConfig, seed: u64) -> Result<BanditRun> {
    let b = config.bandit.as_ref().expect("bandit mode carries bandit settings");
    let env = BanditEnvironment::uniform_random(b.arms, seed);
    Ok(run_bandit_experiment(&env, b.policy, b.k, b.horizon, seed)?)
}

/// Runs the experiment at `config.seed`.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    match &config.bandit {
        None => {
            let run = run_federation_seed(config, config.seed)?;
            let last = run.metrics.last().expect("at least one round");
            let summary = format!(
                "{} seed={} rounds={} final_accuracy={:.4} trailing10_accuracy={:.4} upload_bits={} flops={}",
                config.method_name(),
                config.seed,
                last.round,
                last.test_accuracy,
                run.trailing_accuracy(10),
                last.upload_bits_cum,
                last.flops_cum,
            );
            Ok(RunOutput { csv: federation_csv(&run)?, summary, rows: run.metrics.len() })
        }
        Some(b) => {
            let run = run_bandit_seed(config, config.seed)?;
            let tail = b.horizon.saturating_sub(BANDIT_TAIL)..b.horizon;
            let summary = format!(
                "{} seed={} horizon={} regret_per_round={:.6} optimal_play_rate_tail={:.4}",
                config.method_name(),
                config.seed,
                b.horizon,
                run.average_regret_at(b.horizon),
                run.optimal_play_rate(tail),
            );
            Ok(RunOutput { csv: bandit_csv(&run)?, summary, rows: b.horizon })
        }
    }
}
