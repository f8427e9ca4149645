//! One stateless Q-learning agent per feature. Each agent holds two action
//! values, Q(0) and Q(1), updated with Q(a) <- Q(a) + alpha * (r - Q(a)).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-agent action-value table. Every value starts at -1, below any
/// attainable reward, so each action's first real feedback is strictly
/// informative.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentTable {
    q: Vec<[f64; 2]>,
}

impl AgentTable {
    pub fn new(num_agents: usize) -> Self {
        AgentTable {
            q: vec![[-1.0, -1.0]; num_agents],
        }
    }

    pub fn num_agents(&self) -> usize {
        self.q.len()
    }

    pub fn value(&self, agent: usize, action: u8) -> f64 {
        self.q[agent][action as usize]
    }

    /// Argmax over the agent's two Q-values; ties resolve to action 0
    /// (feature off), biasing early training toward smaller subsets.
    pub fn greedy_action(&self, agent: usize) -> u8 {
        let [q0, q1] = self.q[agent];
        u8::from(q1 > q0)
    }

    /// All agents' greedy actions, in agent order.
    pub fn greedy_actions(&self) -> Vec<u8> {
        (0..self.q.len()).map(|i| self.greedy_action(i)).collect()
    }

    /// Q(a) <- Q(a) + alpha * (r - Q(a)); touches only the (agent, action) cell.
    pub fn update(&mut self, agent: usize, action: u8, reward: f64, alpha: f64) {
        let q = &mut self.q[agent][action as usize];
        *q += alpha * (reward - *q);
    }
}

/// Learning-rate and exploration schedule with multiplicative per-episode decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningSchedule {
    pub alpha: f64,
    pub epsilon: f64,
    pub alpha_decay: f64,
    pub epsilon_decay: f64,
}

impl LearningSchedule {
    pub fn new(alpha: f64, epsilon: f64, alpha_decay: f64, epsilon_decay: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be in (0,1], got {alpha}"
            )));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be in [0,1], got {epsilon}"
            )));
        }
        for (name, v) in [("alpha_decay", alpha_decay), ("epsilon_decay", epsilon_decay)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be in (0,1], got {v}"
                )));
            }
        }
        Ok(LearningSchedule {
            alpha,
            epsilon,
            alpha_decay,
            epsilon_decay,
        })
    }

    pub fn decay(&mut self) {
        self.alpha *= self.alpha_decay;
        self.epsilon *= self.epsilon_decay;
    }
}

impl Default for LearningSchedule {
    fn default() -> Self {
        LearningSchedule {
            alpha: 0.2,
            epsilon: 0.15,
            alpha_decay: 0.9995,
            epsilon_decay: 0.9995,
        }
    }
}

/// With probability 1 - epsilon the greedy action; otherwise uniform over
/// {0,1} (the random branch may re-pick the greedy action).
pub fn epsilon_greedy_action<R: Rng>(
    table: &AgentTable,
    agent: usize,
    schedule: &LearningSchedule,
    rng: &mut R,
) -> u8 {
    if rng.random::<f64>() < schedule.epsilon {
        rng.random_range(0..2u8)
    } else {
        table.greedy_action(agent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    #[test]
    fn greedy_is_argmax() {
        let mut t = AgentTable::new(1);
        t.q[0] = [-0.2, 0.3];
        assert_eq!(t.greedy_action(0), 1);
    }

    #[test]
    fn greedy_tie_resolves_to_off() {
        let t = AgentTable::new(3);
        for i in 0..3 {
            assert_eq!(t.greedy_action(i), 0);
        }
    }

    #[test]
    fn greedy_invariant_under_positive_scaling() {
        let mut t = AgentTable::new(1);
        t.q[0] = [-0.4, 0.8];
        let before = t.greedy_action(0);
        for scale in [0.5, 2.0, 100.0] {
            let mut scaled = t.clone();
            scaled.q[0] = [t.q[0][0] * scale, t.q[0][1] * scale];
            assert_eq!(scaled.greedy_action(0), before);
        }
    }

    #[test]
    fn update_by_substitution() {
        let mut t = AgentTable::new(2);
        t.update(0, 1, 0.5, 0.2);
        assert!((t.value(0, 1) - (-0.7)).abs() < 1e-12);
        // untouched cells stay at the initialisation value
        assert_eq!(t.value(0, 0), -1.0);
        assert_eq!(t.value(1, 0), -1.0);
        assert_eq!(t.value(1, 1), -1.0);
    }

    #[test]
    fn update_fixed_point_when_reward_equals_q() {
        let mut t = AgentTable::new(1);
        t.q[0] = [0.25, -1.0];
        t.update(0, 0, 0.25, 0.3);
        assert!((t.value(0, 0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn update_with_alpha_one_overwrites() {
        let mut t = AgentTable::new(1);
        t.update(0, 0, 0.9, 1.0);
        assert!((t.value(0, 0) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn decay_single_step() {
        let mut s = LearningSchedule::default();
        s.decay();
        assert!((s.epsilon - 0.149925).abs() < 1e-12);
        assert!((s.alpha - 0.1999).abs() < 1e-12);
    }

    #[test]
    fn decay_closed_form_after_5000_steps() {
        let mut s = LearningSchedule::default();
        for _ in 0..5000 {
            s.decay();
        }
        let expected = 0.15 * 0.9995f64.powi(5000);
        assert!((s.epsilon - expected).abs() < 1e-6);
        assert!((expected - 0.01231).abs() < 5e-6);
    }

    #[test]
    fn decay_factor_one_is_identity() {
        let mut s = LearningSchedule::new(0.2, 0.15, 1.0, 1.0).unwrap();
        for _ in 0..100 {
            s.decay();
        }
        assert_eq!(s.alpha, 0.2);
        assert_eq!(s.epsilon, 0.15);
    }

    #[test]
    fn epsilon_zero_always_greedy() {
        let mut t = AgentTable::new(1);
        t.q[0] = [0.1, 0.9];
        let s = LearningSchedule::new(0.2, 0.0, 1.0, 1.0).unwrap();
        let mut rng = seeded_rng(1);
        for _ in 0..1000 {
            assert_eq!(epsilon_greedy_action(&t, 0, &s, &mut rng), 1);
        }
    }

    #[test]
    fn epsilon_one_is_uniform() {
        let t = AgentTable::new(1);
        let s = LearningSchedule::new(0.2, 1.0, 1.0, 1.0).unwrap();
        let mut rng = seeded_rng(2);
        let n = 10_000;
        let ones: usize = (0..n)
            .map(|_| usize::from(epsilon_greedy_action(&t, 0, &s, &mut rng)))
            .sum();
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((ones as f64 - n as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn epsilon_greedy_offgreedy_rate_is_half_epsilon() {
        let mut t = AgentTable::new(1);
        t.q[0] = [-0.5, 0.5]; // greedy = 1
        let s = LearningSchedule::new(0.2, 0.15, 1.0, 1.0).unwrap();
        let mut rng = seeded_rng(3);
        let n = 100_000;
        let zeros: usize = (0..n)
            .map(|_| usize::from(epsilon_greedy_action(&t, 0, &s, &mut rng) == 0))
            .sum();
        let p = 0.075;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((zeros as f64 - n as f64 * p).abs() < 3.0 * sigma);
    }

    /// Deterministic two-armed bandit: reward 1 for action 1, 0 for action 0.
    #[test]
    fn single_agent_bandit_converges() {
        let mut t = AgentTable::new(1);
        let mut s = LearningSchedule::default();
        let mut rng = seeded_rng(4);
        for _ in 0..1000 {
            let a = epsilon_greedy_action(&t, 0, &s, &mut rng);
            let r = f64::from(a);
            t.update(0, a, r, s.alpha);
            s.decay();
        }
        assert_eq!(t.greedy_action(0), 1);
    }

    #[test]
    fn fixed_seed_gives_identical_action_sequences() {
        let t = AgentTable::new(5);
        let s = LearningSchedule::default();
        let draw = |seed: u64| -> Vec<u8> {
            let mut rng = seeded_rng(seed);
            (0..200)
                .map(|i| epsilon_greedy_action(&t, i % 5, &s, &mut rng))
                .collect()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }
}
