use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::runner::{run_bandit_seed, run_federation_seed, BANDIT_TAIL};
use super::{ConfigError, ExperimentConfig, Mode};
use crate::Result;

/// Adjustments averaged for the churn column.
const CHURN_WINDOW: usize = 10;
/// Rounds averaged for the trailing accuracy column.
const TRAILING_WINDOW: usize = 10;

/// One method's results, averaged over its seed list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub method: String,
    pub seeds: usize,
    /// Final test accuracy (federation) or final `Reg(T)/T` (bandit).
    pub value_mean: f64,
    pub value_stderr: f64,
    /// 10-round trailing accuracy (federation) or optimal-play rate over the
    /// last 2000 rounds (bandit).
    pub secondary_mean: f64,
    pub upload_bits: Option<f64>,
    pub flops: Option<f64>,
    pub churn: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareTable {
    pub mode: Mode,
    pub rows: Vec<CompareRow>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean; zero for a single sample.
fn stderr(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

fn check_comparable(configs: &[ExperimentConfig]) -> Result<(), ConfigError> {
    let first = configs
        .first()
        .filter(|_| configs.len() >= 2)
        .ok_or_else(|| ConfigError::Incomparable("at least two configs are required".into()))?;
    for (i, c) in configs.iter().enumerate().skip(1) {
        if c.mode != first.mode {
            return Err(ConfigError::Incomparable(format!("config {} uses a different mode", i + 1)));
        }
        if c.seeds() != first.seeds() {
            return Err(ConfigError::Incomparable(format!("config {} uses a different seed list", i + 1)));
        }
        let same_data = match first.mode {
            Mode::Federation => c.dataset == first.dataset,
            Mode::Bandit => {
                let (a, b) = (first.bandit.as_ref(), c.bandit.as_ref());
                a.map(|a| (a.arms, a.k, a.horizon)) == b.map(|b| (b.arms, b.k, b.horizon))
            }
        };
        if !same_data {
            return Err(ConfigError::Incomparable(format!("config {} uses a different dataset", i + 1)));
        }
    }
    Ok(())
}

fn summarize(config: &ExperimentConfig) -> Result<CompareRow> {
    let seeds = config.seeds();
    let method = config.method_name().to_string();
    match config.mode {
        Mode::Federation => {
            let runs = seeds.par_iter().map(|&s| run_federation_seed(config, s)).collect::<Result<Vec<_>>>()?;
            let final_acc: Vec<f64> = runs.iter().map(|r| r.metrics.last().map_or(0.0, |m| m.test_accuracy)).collect();
            let trailing: Vec<f64> = runs.iter().map(|r| r.trailing_accuracy(TRAILING_WINDOW)).collect();
            let last = |f: fn(&crate::fed::RoundMetrics) -> u64| -> f64 {
                mean(&runs.iter().map(|r| r.metrics.last().map_or(0, f) as f64).collect::<Vec<_>>())
            };
            let churn: Vec<f64> = runs
                .iter()
                .filter_map(|r| {
                    let c = r.adjustment_churn();
                    (!c.is_empty()).then(|| mean(&c[c.len().saturating_sub(CHURN_WINDOW)..]))
                })
                .collect();
            Ok(CompareRow {
                method,
                seeds: seeds.len(),
                value_mean: mean(&final_acc),
                value_stderr: stderr(&final_acc),
                secondary_mean: mean(&trailing),
                upload_bits: Some(last(|m| m.upload_bits_cum)),
                flops: Some(last(|m| m.flops_cum)),
                churn: Some(if churn.is_empty() { 0.0 } else { mean(&churn) }),
            })
        }
        Mode::Bandit => {
            let horizon = config.bandit.as_ref().expect("bandit settings").horizon;
            let runs = seeds.par_iter().map(|&s| run_bandit_seed(config, s)).collect::<Result<Vec<_>>>()?;
            let regret: Vec<f64> = runs.iter().map(|r| r.average_regret_at(horizon)).collect();
            let tail = horizon.saturating_sub(BANDIT_TAIL)..horizon;
            let optimal: Vec<f64> = runs.iter().map(|r| r.optimal_play_rate(tail.clone())).collect();
            Ok(CompareRow {
                method,
                seeds: seeds.len(),
                value_mean: mean(&regret),
                value_stderr: stderr(&regret),
                secondary_mean: mean(&optimal),
                upload_bits: None,
                flops: None,
                churn: None,
            })
        }
    }
}

/// Runs every config over its seed list and tabulates the results in
/// config order.
pub fn compare(configs: &[ExperimentConfig]) -> Result<CompareTable> {
    check_comparable(configs)?;
    let rows = configs.par_iter().map(summarize).collect::<Result<Vec<_>>>()?;
    Ok(CompareTable { mode: configs[0].mode, rows })
}

impl CompareTable {
    /// Column-aligned plain-text rendering.
    pub fn render(&self) -> String {
        let header: Vec<String> = match self.mode {
            Mode::Federation => {
                ["method", "final_accuracy", "trailing10_accuracy", "upload_bits", "flops", "churn_last10"]
            }
            Mode::Bandit => ["method", "regret_per_round", "optimal_play_rate_tail", "", "", ""],
        }
        .iter()
        .filter(|h| !h.is_empty())
        .map(|h| h.to_string())
        .collect();
        let mut lines = vec![header];
        for r in &self.rows {
            let mut cells = vec![r.method.clone(), format!("{:.4} ± {:.4}", r.value_mean, r.value_stderr)];
            cells.push(format!("{:.4}", r.secondary_mean));
            if let (Some(up), Some(fl), Some(ch)) = (r.upload_bits, r.flops, r.churn) {
                cells.push(format!("{up:.4e}"));
                cells.push(format!("{fl:.4e}"));
                cells.push(format!("{ch:.5}"));
            }
            lines.push(cells);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| lines.iter().map(|l| l.get(c).map_or(0, |s| s.chars().count())).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for line in &lines {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (s, &w))| if i == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::parse_config_str;

    fn fed(adjuster: &str, extra: &str) -> ExperimentConfig {
        let text = format!(
            "mode = federation\nseed = 2\nrounds = 6\ntotal_clients = 6\nclients_per_round = 3\nhidden_layers = 16\n\
             synthetic_features = 8\nsynthetic_samples_per_class = 20\nlocal_epochs = 1\nadjust_interval = 2\n\
             adjuster = {adjuster}\n{extra}"
        );
        parse_config_str(&text, None).unwrap()
    }

    #[test]
    fn stderr_examples() {
        assert_eq!(stderr(&[0.7]), 0.0);
        assert!((stderr(&[1.0, 3.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identical_configs_give_identical_rows() {
        let table = compare(&[fed("tsadj", ""), fed("tsadj", "")]).unwrap();
        assert_eq!(table.rows[0], table.rows[1]);
        assert_eq!(table.rows[0].value_stderr, 0.0);
    }

    #[test]
    fn rows_follow_config_order_with_stderr() {
        let table = compare(&[fed("tsadj", "seed_count = 3\n"), fed("prune_regrow", "seed_count = 3\n")]).unwrap();
        let methods: Vec<&str> = table.rows.iter().map(|r| r.method.as_str()).collect();
        assert_eq!(methods, ["FedRTS", "PruneRegrow"]);
        assert!(table.rows.iter().all(|r| r.seeds == 3 && r.churn.is_some()));
        let text = table.render();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().next().unwrap().starts_with("method"));
    }

    #[test]
    fn different_datasets_are_incomparable() {
        let err = compare(&[fed("tsadj", ""), fed("prune_regrow", "synthetic_spread = 2\n")]).unwrap_err();
        assert!(matches!(err, crate::Error::Config(ConfigError::Incomparable(_))));
        let err = compare(&[fed("tsadj", "")]).unwrap_err();
        assert!(matches!(err, crate::Error::Config(ConfigError::Incomparable(_))));
    }

    #[test]
    fn bandit_compare() {
        let mk = |p: &str| {
            parse_config_str(&format!("mode = bandit\nseed = 0\narms = 6\nk = 2\nhorizon = 200\npolicy = {p}\n"), None)
                .unwrap()
        };
        let table = compare(&[mk("thompson"), mk("cucb")]).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows.iter().all(|r| r.churn.is_none()));
        assert_eq!(table.render().lines().next().unwrap().split_whitespace().count(), 3);
    }
}
