use super::{check_k, CmabError, SuperArm};

/// Reward model of a super arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RewardKind {
    /// `r(S, mu) = sum of mu_i over i in S`.
    #[default]
    LinearSum,
}

/// Stationary Bernoulli arms with known means (oracle side only).
#[derive(Debug, Clone, PartialEq)]
pub struct BanditEnvironment {
    mu: Vec<f64>,
    reward_kind: RewardKind,
    seed: u64,
}

impl BanditEnvironment {
    pub fn new(mu: Vec<f64>, seed: u64) -> Result<Self, CmabError> {
        if let Some((arm, &value)) = mu.iter().enumerate().find(|(_, m)| !(0.0..=1.0).contains(*m)) {
            return Err(CmabError::InvalidMean { arm, value });
        }
        Ok(Self { mu, reward_kind: RewardKind::LinearSum, seed })
    }

    /// Means drawn uniformly from `[0, 1)`.
    pub fn uniform_random(arms: usize, seed: u64) -> Self {
        use rand::Rng;
        let mut r = crate::rng::stream(seed, &[crate::rng::tag::BANDIT_ENV]);
        let mu = (0..arms).map(|_| r.random::<f64>()).collect();
        Self { mu, reward_kind: RewardKind::LinearSum, seed }
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn arm_count(&self) -> usize {
        self.mu.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn reward_kind(&self) -> RewardKind {
        self.reward_kind
    }

    pub fn reward(&self, arms: &[usize]) -> f64 {
        match self.reward_kind {
            RewardKind::LinearSum => arms.iter().map(|&i| self.mu[i]).sum(),
        }
    }
}

/// Greedy optimal action: grows the set one arm at a time, each time adding
/// the arm that maximises the reward of the extended set. Returned in the
/// order arms were added. Ties go to the lowest index.
pub fn greedy_optimal(env: &BanditEnvironment, k: usize) -> Result<Vec<usize>, CmabError> {
    check_k(k, env.arm_count())?;
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut taken = vec![false; env.arm_count()];
    let mut scratch = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..env.arm_count()).filter(|&i| !taken[i]) {
            scratch.clear();
            scratch.extend_from_slice(&chosen);
            scratch.push(i);
            let r = env.reward(&scratch);
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((i, r));
            }
        }
        let (i, _) = best.expect("k <= arm count");
        taken[i] = true;
        chosen.push(i);
    }
    Ok(chosen)
}

/// Cumulative regret against a fixed optimal reward.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTracker {
    optimal_reward: f64,
    cumulative_regret: f64,
    per_round_gap: Vec<f64>,
}

impl RegretTracker {
    pub fn new(optimal_reward: f64) -> Self {
        Self { optimal_reward, cumulative_regret: 0.0, per_round_gap: Vec::new() }
    }

    /// Tracker whose optimum is the greedy optimal super arm of `env`.
    pub fn for_environment(env: &BanditEnvironment, k: usize) -> Result<Self, CmabError> {
        Ok(Self::new(env.reward(&greedy_optimal(env, k)?)))
    }

    pub fn optimal_reward(&self) -> f64 {
        self.optimal_reward
    }

    pub fn cumulative_regret(&self) -> f64 {
        self.cumulative_regret
    }

    pub fn per_round_gap(&self) -> &[f64] {
        &self.per_round_gap
    }

    pub fn rounds(&self) -> usize {
        self.per_round_gap.len()
    }

    /// Appends `max(r* - r(played), 0)` and returns it.
    pub fn record(&mut self, env: &BanditEnvironment, played: &SuperArm) -> f64 {
        let gap = (self.optimal_reward - env.reward(played.indices())).max(0.0);
        self.per_round_gap.push(gap);
        self.cumulative_regret += gap;
        gap
    }
}

/// Functional form of [`RegretTracker::record`].
pub fn record_round(tracker: &RegretTracker, env: &BanditEnvironment, played: &SuperArm) -> RegretTracker {
    let mut next = tracker.clone();
    next.record(env, played);
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn env(mu: &[f64]) -> BanditEnvironment {
        BanditEnvironment::new(mu.to_vec(), 0).unwrap()
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(greedy_optimal(&env(&[0.3, 0.9, 0.5]), 2).unwrap(), vec![1, 2]);
        assert_eq!(greedy_optimal(&env(&[0.3, 0.9, 0.5]), 1).unwrap(), vec![1]);
        assert_eq!(greedy_optimal(&env(&[0.2, 0.2, 0.2]), 2).unwrap(), vec![0, 1]);
        assert!(greedy_optimal(&env(&[0.2]), 2).is_err());
    }

    #[test]
    fn regret_gaps() {
        let e = env(&[0.9, 0.5, 0.1]);
        let mut tr = RegretTracker::for_environment(&e, 1).unwrap();
        assert_eq!(tr.record(&e, &SuperArm::new(vec![0], 3).unwrap()), 0.0);
        let gap = tr.record(&e, &SuperArm::new(vec![2], 3).unwrap());
        assert!((gap - 0.8).abs() < 1e-12);

        let mut t = RegretTracker::new(0.0);
        t.per_round_gap = vec![0.8, 0.0, 0.2];
        t.cumulative_regret = t.per_round_gap.iter().sum();
        assert!((t.cumulative_regret() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn record_round_is_pure() {
        let e = env(&[0.9, 0.5]);
        let t0 = RegretTracker::for_environment(&e, 1).unwrap();
        let t1 = record_round(&t0, &e, &SuperArm::new(vec![1], 2).unwrap());
        assert_eq!(t0.rounds(), 0);
        assert_eq!(t1.rounds(), 1);
    }

    fn brute_force_best(mu: &[f64], k: usize) -> f64 {
        fn rec(mu: &[f64], start: usize, left: usize, acc: f64, best: &mut f64) {
            if left == 0 {
                *best = best.max(acc);
                return;
            }
            for i in start..=mu.len() - left {
                rec(mu, i + 1, left - 1, acc + mu[i], best);
            }
        }
        let mut best = f64::NEG_INFINITY;
        rec(mu, 0, k, 0.0, &mut best);
        best
    }

    proptest! {
        #[test]
        fn greedy_matches_exhaustive_search(mu in proptest::collection::vec(0.0f64..=1.0, 1..=15), kf in 0.0f64..1.0) {
            let k = 1 + ((mu.len() as f64) * kf) as usize % mu.len();
            let e = env(&mu);
            let greedy = e.reward(&greedy_optimal(&e, k).unwrap());
            prop_assert!((greedy - brute_force_best(&mu, k)).abs() < 1e-12);
        }
    }
}
