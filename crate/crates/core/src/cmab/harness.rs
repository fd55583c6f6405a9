use rand::Rng;

use super::{
    greedy_optimal, sample_thompson, select_cucb, BanditEnvironment, BetaPosteriorBank, CmabError, OutcomeVector,
    RegretTracker, SuperArm, UcbState,
};
use crate::rng::{self, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BanditPolicy {
    Thompson,
    Cucb,
}

impl BanditPolicy {
    pub fn name(self) -> &'static str {
        match self {
            BanditPolicy::Thompson => "thompson",
            BanditPolicy::Cucb => "cucb",
        }
    }
}

/// Full trace of one bandit experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditRun {
    pub tracker: RegretTracker,
    pub play_counts: Vec<u64>,
    /// Whether the optimal super arm was played, per round.
    pub optimal_played: Vec<bool>,
    pub optimal: SuperArm,
}

impl BanditRun {
    /// Fraction of rounds in `range` that played the optimal super arm.
    pub fn optimal_play_rate(&self, range: std::ops::Range<usize>) -> f64 {
        let n = range.len();
        if n == 0 {
            return 0.0;
        }
        self.optimal_played[range].iter().filter(|&&b| b).count() as f64 / n as f64
    }

    /// `Reg(t) / t` after the first `t` rounds.
    pub fn average_regret_at(&self, t: usize) -> f64 {
        self.tracker.per_round_gap()[..t].iter().sum::<f64>() / t as f64
    }
}

/// Select, observe Bernoulli outcomes for the played arms only, update,
/// record. Thompson updates use unit scaling so the posterior stays the exact
/// Beta-Bernoulli conjugate.
pub fn run_bandit_experiment(
    env: &BanditEnvironment,
    policy: BanditPolicy,
    k: usize,
    horizon: usize,
    seed: u64,
) -> Result<BanditRun, CmabError> {
    if horizon == 0 {
        return Err(CmabError::EmptyHorizon);
    }
    let arms = env.arm_count();
    let optimal = SuperArm::new(greedy_optimal(env, k)?, arms)?;
    let mut tracker = RegretTracker::new(env.reward(optimal.indices()));
    let mut policy_rng = rng::stream(seed, &[tag::BANDIT_POLICY]);
    let mut outcome_rng = rng::stream(seed, &[tag::BANDIT_OUTCOMES]);

    let mut bank = BetaPosteriorBank::uniform(arms);
    let mut ucb = UcbState::new(arms);
    let mut play_counts = vec![0u64; arms];
    let mut optimal_played = Vec::with_capacity(horizon);

    for _ in 0..horizon {
        let played = match policy {
            BanditPolicy::Thompson => sample_thompson(&bank, k, &mut policy_rng)?,
            BanditPolicy::Cucb => select_cucb(&ucb, k)?,
        };
        let mut outcomes = OutcomeVector::unobserved(arms);
        for &i in played.indices() {
            let x = if outcome_rng.random::<f64>() < env.mu()[i] { 1.0 } else { 0.0 };
            outcomes.set(i, x);
            play_counts[i] += 1;
        }
        match policy {
            BanditPolicy::Thompson => bank.update(&outcomes, 1.0)?,
            BanditPolicy::Cucb => ucb.update(&played, &outcomes)?,
        }
        tracker.record(env, &played);
        optimal_played.push(played == optimal);
    }

    Ok(BanditRun { tracker, play_counts, optimal_played, optimal })
}
