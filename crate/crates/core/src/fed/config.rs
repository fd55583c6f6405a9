use serde::{Deserialize, Serialize};

use super::FedError;
use crate::cost::Method;

/// Topology adjuster used on outer rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjusterKind {
    /// Thompson-sampling adjustment (FedRTS).
    TsAdj,
    /// Combinatorial UCB (FedCUCB).
    Cucb,
    /// Magnitude prune / gradient-vote regrow.
    PruneRegrow,
    /// No sparsity at all (FedAVG); the target density is ignored.
    Dense,
}

impl AdjusterKind {
    pub fn method(self) -> Method {
        match self {
            AdjusterKind::TsAdj => Method::FedRts,
            AdjusterKind::Cucb => Method::FedCucb,
            AdjusterKind::PruneRegrow => Method::DeterministicBaseline,
            AdjusterKind::Dense => Method::FedAvg,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            AdjusterKind::TsAdj => "tsadj",
            AdjusterKind::Cucb => "cucb",
            AdjusterKind::PruneRegrow => "prune_regrow",
            AdjusterKind::Dense => "fedavg",
        }
    }
}

impl std::str::FromStr for AdjusterKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tsadj" | "fedrts" => Ok(AdjusterKind::TsAdj),
            "cucb" | "fedcucb" => Ok(AdjusterKind::Cucb),
            "prune_regrow" | "deterministic" => Ok(AdjusterKind::PruneRegrow),
            "fedavg" | "dense" => Ok(AdjusterKind::Dense),
            other => Err(format!("unknown adjuster `{other}` (tsadj, cucb, prune_regrow, fedavg)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FederationConfig {
    pub total_clients: usize,
    pub clients_per_round: usize,
    /// `T_max`.
    pub rounds: u64,
    /// `Delta T`.
    pub adjust_interval: u64,
    /// `T_end`: no topology adjustment at or after this round.
    pub adjust_cutoff: u64,
    pub local_epochs: u64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub target_density: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub alpha_adj: f64,
    pub adjuster: AdjusterKind,
    pub hidden_layers: Vec<usize>,
    pub dirichlet_alpha: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for FederationConfig {
    fn default() -> Self {
        Self {
            total_clients: 100,
            clients_per_round: 10,
            rounds: 500,
            adjust_interval: 10,
            adjust_cutoff: 300,
            local_epochs: 5,
            learning_rate: 0.01,
            batch_size: 16,
            target_density: 0.3,
            gamma: 0.5,
            lambda: 10.0,
            alpha_adj: 0.4,
            adjuster: AdjusterKind::TsAdj,
            hidden_layers: vec![128, 128],
            dirichlet_alpha: 0.5,
            test_fraction: 0.2,
            seed: 0,
        }
    }
}

impl FederationConfig {
    pub fn validate(&self) -> Result<(), FedError> {
        let fail = |msg: String| Err(FedError::InvalidConfig(msg));
        if self.total_clients == 0 {
            return fail("total_clients must be at least 1".into());
        }
        if self.clients_per_round == 0 || self.clients_per_round > self.total_clients {
            return fail(format!("clients_per_round must be in 1..={}", self.total_clients));
        }
        if self.rounds == 0 {
            return fail("rounds must be at least 1".into());
        }
        if self.adjust_interval == 0 {
            return fail("adjust_interval must be at least 1".into());
        }
        if self.adjust_cutoff > self.rounds {
            return fail(format!("adjust_cutoff {} exceeds rounds {}", self.adjust_cutoff, self.rounds));
        }
        if self.local_epochs == 0 {
            return fail("local_epochs must be at least 1".into());
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be a non-negative number".into());
        }
        if self.batch_size == 0 {
            return fail("batch_size must be at least 1".into());
        }
        if !(self.target_density > 0.0 && self.target_density <= 1.0) {
            return fail("target_density must lie in (0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return fail("gamma must lie in [0, 1]".into());
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return fail("lambda must be positive".into());
        }
        if !(self.alpha_adj > 0.0 && self.alpha_adj < 1.0) {
            return fail("alpha_adj must lie in (0, 1)".into());
        }
        if !(self.dirichlet_alpha > 0.0 && self.dirichlet_alpha.is_finite()) {
            return fail("dirichlet_alpha must be positive".into());
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return fail("test_fraction must lie in (0, 1)".into());
        }
        if self.hidden_layers.contains(&0) {
            return fail("hidden layer widths must be positive".into());
        }
        Ok(())
    }

    /// Whether round `t` (1-based) adjusts the topology.
    pub fn is_outer(&self, t: u64) -> bool {
        self.adjuster != AdjusterKind::Dense && t.is_multiple_of(self.adjust_interval) && t < self.adjust_cutoff
    }

    pub fn effective_density(&self) -> f64 {
        if self.adjuster == AdjusterKind::Dense {
            1.0
        } else {
            self.target_density
        }
    }
}
