use std::path::{Path, PathBuf};

use super::ConfigError;
use crate::cmab::BanditPolicy;
use crate::data::SyntheticSpec;
use crate::fed::{AdjusterKind, FederationConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Federation,
    Bandit,
}

/// Where federation data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    /// Regenerated per seed from the `DATA` stream.
    Synthetic(SyntheticSpec),
    Csv(PathBuf),
}

pub const DEFAULT_SYNTHETIC: SyntheticSpec =
    SyntheticSpec { classes: 10, features: 64, samples_per_class: 200, spread: 1.0, separation: 4.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct BanditConfig {
    pub arms: usize,
    pub k: usize,
    pub horizon: usize,
    pub policy: BanditPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: u64,
    /// Number of seeds `seed, seed + 1, ...` used by `compare`.
    pub seed_count: usize,
    pub out: Option<PathBuf>,
    /// Meaningful in federation mode; `seed` is copied in at run time.
    pub federation: FederationConfig,
    pub dataset: DatasetSource,
    /// Present iff `mode = bandit`.
    pub bandit: Option<BanditConfig>,
}

const COMMON_KEYS: &[&str] = &["mode", "seed", "seed_count", "out"];
const FEDERATION_KEYS: &[&str] = &[
    "total_clients",
    "clients_per_round",
    "rounds",
    "adjust_interval",
    "adjust_cutoff",
    "local_epochs",
    "learning_rate",
    "batch_size",
    "target_density",
    "gamma",
    "lambda",
    "alpha_adj",
    "adjuster",
    "hidden_layers",
    "dirichlet_alpha",
    "test_fraction",
    "dataset_path",
    "synthetic_classes",
    "synthetic_features",
    "synthetic_samples_per_class",
    "synthetic_spread",
    "synthetic_separation",
];
const BANDIT_KEYS: &[&str] = &["arms", "k", "horizon", "policy"];

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>().map_err(|e| ConfigError::InvalidValue { key: key.to_string(), message: e.to_string() })
}

fn parse_policy(raw: &str) -> Result<BanditPolicy, ConfigError> {
    match raw.to_ascii_lowercase().as_str() {
        "thompson" | "ts" => Ok(BanditPolicy::Thompson),
        "cucb" => Ok(BanditPolicy::Cucb),
        other => Err(ConfigError::InvalidValue {
            key: "policy".into(),
            message: format!("unknown policy `{other}` (thompson, cucb)"),
        }),
    }
}

fn parse_list(key: &str, raw: &str) -> Result<Vec<usize>, ConfigError> {
    if raw.trim().is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',').map(|part| parse_value(key, part.trim())).collect()
}

/// Parses the flat `key = value` format. Blank lines and `#` comments are
/// ignored; relative `dataset_path` values resolve against `base_dir`.
pub fn parse_config_str(text: &str, base_dir: Option<&Path>) -> Result<ExperimentConfig, ConfigError> {
    let mut entries: Vec<(String, String)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: n + 1,
            message: format!("expected key = value, got `{line}`"),
        })?;
        let key = key.trim().to_string();
        if entries.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError::Syntax { line: n + 1, message: format!("duplicate key `{key}`") });
        }
        entries.push((key, value.trim().to_string()));
    }
    let get = |key: &str| entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());

    let mode = match get("mode").ok_or_else(|| ConfigError::MissingKey("mode".into()))? {
        "federation" => Mode::Federation,
        "bandit" => Mode::Bandit,
        other => {
            return Err(ConfigError::InvalidValue {
                key: "mode".into(),
                message: format!("unknown mode `{other}` (federation, bandit)"),
            })
        }
    };
    let allowed = match mode {
        Mode::Federation => FEDERATION_KEYS,
        Mode::Bandit => BANDIT_KEYS,
    };
    for (key, _) in &entries {
        if !COMMON_KEYS.contains(&key.as_str()) && !allowed.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key.clone()));
        }
    }

    let seed: u64 = parse_value("seed", get("seed").ok_or_else(|| ConfigError::MissingKey("seed".into()))?)?;
    let seed_count: usize = get("seed_count").map(|v| parse_value("seed_count", v)).transpose()?.unwrap_or(1);
    if seed_count == 0 {
        return Err(ConfigError::InvalidValue { key: "seed_count".into(), message: "must be at least 1".into() });
    }
    let out = get("out").map(PathBuf::from);

    let mut fed = FederationConfig { seed, ..FederationConfig::default() };
    let mut synthetic = DEFAULT_SYNTHETIC;
    let mut dataset_path = None;
    let mut bandit = None;

    match mode {
        Mode::Federation => {
            for (key, raw) in &entries {
                let raw = raw.as_str();
                match key.as_str() {
                    "total_clients" => fed.total_clients = parse_value(key, raw)?,
                    "clients_per_round" => fed.clients_per_round = parse_value(key, raw)?,
                    "rounds" => fed.rounds = parse_value(key, raw)?,
                    "adjust_interval" => fed.adjust_interval = parse_value(key, raw)?,
                    "adjust_cutoff" => fed.adjust_cutoff = parse_value(key, raw)?,
                    "local_epochs" => fed.local_epochs = parse_value(key, raw)?,
                    "learning_rate" => fed.learning_rate = parse_value(key, raw)?,
                    "batch_size" => fed.batch_size = parse_value(key, raw)?,
                    "target_density" => fed.target_density = parse_value(key, raw)?,
                    "gamma" => fed.gamma = parse_value(key, raw)?,
                    "lambda" => fed.lambda = parse_value(key, raw)?,
                    "alpha_adj" => fed.alpha_adj = parse_value(key, raw)?,
                    "adjuster" => {
                        fed.adjuster = raw
                            .parse::<AdjusterKind>()
                            .map_err(|message| ConfigError::InvalidValue { key: key.clone(), message })?
                    }
                    "hidden_layers" => fed.hidden_layers = parse_list(key, raw)?,
                    "dirichlet_alpha" => fed.dirichlet_alpha = parse_value(key, raw)?,
                    "test_fraction" => fed.test_fraction = parse_value(key, raw)?,
                    "dataset_path" => dataset_path = Some(PathBuf::from(raw)),
                    "synthetic_classes" => synthetic.classes = parse_value(key, raw)?,
                    "synthetic_features" => synthetic.features = parse_value(key, raw)?,
                    "synthetic_samples_per_class" => synthetic.samples_per_class = parse_value(key, raw)?,
                    "synthetic_spread" => synthetic.spread = parse_value(key, raw)?,
                    "synthetic_separation" => synthetic.separation = parse_value(key, raw)?,
                    _ => {}
                }
            }
            // Without an explicit cutoff, adjustments may run for the whole horizon.
            if get("adjust_cutoff").is_none() {
                fed.adjust_cutoff = fed.adjust_cutoff.min(fed.rounds);
            }
            fed.validate().map_err(|e| ConfigError::OutOfRange(e.to_string()))?;
            if synthetic.classes == 0 || synthetic.features == 0 || synthetic.samples_per_class == 0 {
                return Err(ConfigError::OutOfRange("synthetic dataset sizes must be positive".into()));
            }
            if !(synthetic.spread >= 0.0 && synthetic.separation >= 0.0) {
                return Err(ConfigError::OutOfRange("synthetic spread and separation must be non-negative".into()));
            }
            if dataset_path.is_some() && entries.iter().any(|(k, _)| k.starts_with("synthetic_")) {
                return Err(ConfigError::OutOfRange("dataset_path cannot be combined with synthetic_* keys".into()));
            }
        }
        Mode::Bandit => {
            let required = |key: &str| -> Result<usize, ConfigError> {
                parse_value(key, get(key).ok_or_else(|| ConfigError::MissingKey(key.into()))?)
            };
            let config = BanditConfig {
                arms: required("arms")?,
                k: required("k")?,
                horizon: required("horizon")?,
                policy: get("policy").map(parse_policy).transpose()?.unwrap_or(BanditPolicy::Thompson),
            };
            if config.arms == 0 || config.k == 0 || config.k > config.arms {
                return Err(ConfigError::OutOfRange(format!("k must lie in 1..={}", config.arms)));
            }
            if config.horizon == 0 {
                return Err(ConfigError::OutOfRange("horizon must be at least 1".into()));
            }
            bandit = Some(config);
        }
    }

    let dataset = match dataset_path {
        Some(p) if p.is_relative() => DatasetSource::Csv(base_dir.map_or(p.clone(), |b| b.join(&p))),
        Some(p) => DatasetSource::Csv(p),
        None => DatasetSource::Synthetic(synthetic),
    };
    Ok(ExperimentConfig { mode, seed, seed_count, out, federation: fed, dataset, bandit })
}

/// Reads and parses a config file; relative dataset paths resolve against
/// the file's directory.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text, path.parent())
}

impl ExperimentConfig {
    /// Display name of the configured method.
    pub fn method_name(&self) -> &'static str {
        match &self.bandit {
            Some(b) => b.policy.name(),
            None => self.federation.adjuster.method().name(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.federation.seed = seed;
        self
    }

    /// Seeds `seed + i` for `i < seed_count`.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.seed_count as u64).map(|i| self.seed.wrapping_add(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_federation_config_gets_defaults() {
        let c = parse_config_str("mode = federation\nseed = 7\n", None).unwrap();
        assert_eq!(c.federation.gamma, 0.5);
        assert_eq!(c.federation.lambda, 10.0);
        assert_eq!(c.federation.adjust_interval, 10);
        assert_eq!(c.federation.alpha_adj, 0.4);
        assert_eq!(c.federation.learning_rate, 0.01);
        assert_eq!(c.federation.local_epochs, 5);
        assert_eq!(c.federation.dirichlet_alpha, 0.5);
        assert_eq!(c.federation.seed, 7);
        assert_eq!(c.dataset, DatasetSource::Synthetic(DEFAULT_SYNTHETIC));
    }

    #[test]
    fn gamma_out_of_range_is_rejected() {
        let err = parse_config_str("mode = federation\nseed = 1\ngamma = 1.5\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::OutOfRange(ref m) if m.contains("gamma")), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config_str("mode = federation\nseed = 1\ngama = 0.5\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey(ref k) if k == "gama"));
        assert!(err.to_string().contains("gama"));
    }

    #[test]
    fn missing_mandatory_keys_are_named() {
        let err = parse_config_str("mode = federation\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::MissingKey(ref k) if k == "seed"));
        let err = parse_config_str("seed = 1\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::MissingKey(ref k) if k == "mode"));
        let err = parse_config_str("mode = bandit\nseed = 1\narms = 5\nk = 2\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::MissingKey(ref k) if k == "horizon"));
    }

    #[test]
    fn keys_from_the_other_mode_are_rejected() {
        let err =
            parse_config_str("mode = bandit\nseed = 1\narms = 5\nk = 2\nhorizon = 3\ngamma = 0.5\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey(ref k) if k == "gamma"));
    }

    #[test]
    fn comments_lists_and_paths() {
        let text = "# header\nmode = federation # inline\nseed = 3\nhidden_layers = 32, 16\n\
                    adjuster = prune_regrow\ndataset_path = data.csv\nrounds = 50\n";
        let c = parse_config_str(text, Some(Path::new("/cfg"))).unwrap();
        assert_eq!(c.federation.hidden_layers, vec![32, 16]);
        assert_eq!(c.federation.adjuster, AdjusterKind::PruneRegrow);
        assert_eq!(c.federation.adjust_cutoff, 50);
        assert_eq!(c.dataset, DatasetSource::Csv(PathBuf::from("/cfg/data.csv")));
        assert_eq!(c.method_name(), "PruneRegrow");
    }

    #[test]
    fn bandit_config() {
        let c = parse_config_str("mode = bandit\nseed = 2\narms = 50\nk = 10\nhorizon = 100\npolicy = cucb\n", None)
            .unwrap();
        let b = c.bandit.unwrap();
        assert_eq!((b.arms, b.k, b.horizon, b.policy), (50, 10, 100, BanditPolicy::Cucb));
        assert!(parse_config_str("mode = bandit\nseed = 2\narms = 5\nk = 6\nhorizon = 1\n", None).is_err());
    }

    #[test]
    fn syntax_errors_report_lines() {
        let err = parse_config_str("mode = federation\nseed\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }));
        let err = parse_config_str("mode = federation\nseed = 1\nseed = 2\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 3, .. }));
        let err = parse_config_str("mode = federation\nseed = x\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::InvalidValue { ref key, .. } if key == "seed"));
    }
}
