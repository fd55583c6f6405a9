use super::{check_k, CmabError, OutcomeVector, SuperArm};
use crate::topk;

/// Empirical means and play counts for combinatorial UCB.
#[derive(Debug, Clone, PartialEq)]
pub struct UcbState {
    empirical_mean: Vec<f64>,
    play_count: Vec<u64>,
    round: u64,
}

impl UcbState {
    /// Fresh state: zero means, zero plays, round 1.
    pub fn new(arm_count: usize) -> Self {
        Self { empirical_mean: vec![0.0; arm_count], play_count: vec![0; arm_count], round: 1 }
    }

    pub fn from_parts(empirical_mean: Vec<f64>, play_count: Vec<u64>, round: u64) -> Result<Self, CmabError> {
        if empirical_mean.len() != play_count.len() {
            return Err(CmabError::LengthMismatch { expected: empirical_mean.len(), got: play_count.len() });
        }
        if let Some((arm, &value)) = empirical_mean.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(CmabError::InvalidMean { arm, value });
        }
        Ok(Self { empirical_mean, play_count, round: round.max(1) })
    }

    pub fn arm_count(&self) -> usize {
        self.empirical_mean.len()
    }

    pub fn empirical_mean(&self) -> &[f64] {
        &self.empirical_mean
    }

    pub fn play_count(&self) -> &[u64] {
        &self.play_count
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Upper confidence bounds `mean + sqrt(3 ln t / (2 plays))`; unplayed
    /// arms get `+inf`.
    pub fn bounds(&self) -> Vec<f64> {
        let log_t = (self.round as f64).ln();
        self.empirical_mean
            .iter()
            .zip(&self.play_count)
            .map(|(&mean, &plays)| confidence_bound(mean, plays, log_t))
            .collect()
    }

    /// Applies [`update_cucb`] in place.
    pub fn update(&mut self, played: &SuperArm, outcomes: &OutcomeVector) -> Result<(), CmabError> {
        if outcomes.len() != self.arm_count() {
            return Err(CmabError::LengthMismatch { expected: self.arm_count(), got: outcomes.len() });
        }
        for &i in played.indices() {
            if i >= self.arm_count() {
                return Err(CmabError::ArmOutOfRange { index: i, arms: self.arm_count() });
            }
            if outcomes.get(i).is_none() {
                return Err(CmabError::MissingOutcome(i));
            }
        }
        for &i in played.indices() {
            let x = outcomes.get(i).expect("checked above");
            self.play_count[i] += 1;
            let n = self.play_count[i] as f64;
            self.empirical_mean[i] = (self.empirical_mean[i] * (n - 1.0) + x) / n;
        }
        self.round += 1;
        Ok(())
    }
}

fn confidence_bound(mean: f64, plays: u64, log_t: f64) -> f64 {
    if plays == 0 {
        f64::INFINITY
    } else {
        mean + (3.0 * log_t / (2.0 * plays as f64)).sqrt()
    }
}

/// Top-`k` arms by upper confidence bound.
pub fn select_cucb(state: &UcbState, k: usize) -> Result<SuperArm, CmabError> {
    check_k(k, state.arm_count())?;
    Ok(SuperArm::from_sorted(topk::top_k(&state.bounds(), k)))
}

/// Running-mean update for the played arms; advances the round counter.
pub fn update_cucb(state: &UcbState, played: &SuperArm, outcomes: &OutcomeVector) -> Result<UcbState, CmabError> {
    let mut next = state.clone();
    next.update(played, outcomes)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arm(v: &[usize], n: usize) -> SuperArm {
        SuperArm::new(v.to_vec(), n).unwrap()
    }

    #[test]
    fn unplayed_arm_is_selected_first() {
        let s = UcbState::from_parts(vec![0.0, 0.9, 0.9], vec![0, 100, 100], 50).unwrap();
        assert_eq!(select_cucb(&s, 1).unwrap().indices(), &[0]);
    }

    #[test]
    fn bound_formula_hand_values() {
        // ln t = 2: bounds 0.5 + sqrt(6/6) = 1.5 and 0.5 + sqrt(6/24) = 1.0.
        assert!((confidence_bound(0.5, 3, 2.0) - 1.5).abs() < 1e-12);
        assert!((confidence_bound(0.5, 12, 2.0) - 1.0).abs() < 1e-12);
        let s = UcbState::from_parts(vec![0.5, 0.5], vec![3, 12], 7).unwrap();
        assert_eq!(select_cucb(&s, 1).unwrap().indices(), &[0]);
    }

    #[test]
    fn equal_counts_follow_mean_order() {
        let s = UcbState::from_parts(vec![0.9, 0.1, 0.5], vec![1000; 3], 5000).unwrap();
        assert_eq!(select_cucb(&s, 2).unwrap().indices(), &[0, 2]);
        assert!(matches!(select_cucb(&s, 4), Err(CmabError::InvalidK { .. })));
    }

    #[test]
    fn running_mean_updates() {
        let s = UcbState::new(2);
        let x = OutcomeVector::new(vec![Some(1.0), None]).unwrap();
        let s1 = update_cucb(&s, &arm(&[0], 2), &x).unwrap();
        assert_eq!((s1.empirical_mean()[0], s1.play_count()[0]), (1.0, 1));
        assert_eq!((s1.empirical_mean()[1], s1.play_count()[1]), (0.0, 0));
        assert_eq!(s1.round(), 2);

        let s = UcbState::from_parts(vec![0.5], vec![1], 3).unwrap();
        let s2 = update_cucb(&s, &arm(&[0], 1), &OutcomeVector::new(vec![Some(1.0)]).unwrap()).unwrap();
        assert_eq!((s2.empirical_mean()[0], s2.play_count()[0]), (0.75, 2));
    }

    #[test]
    fn missing_outcome_for_played_arm() {
        let s = UcbState::new(2);
        let x = OutcomeVector::new(vec![Some(1.0), None]).unwrap();
        assert_eq!(update_cucb(&s, &arm(&[0, 1], 2), &x), Err(CmabError::MissingOutcome(1)));
    }
}
