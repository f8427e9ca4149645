//! Wrapper search strategies: MARL (one Q-learning agent per feature,
//! trained on the shared global reward), CLEAN (same agents, trained on
//! private counterfactual rewards), and a generational GA. Each maps a
//! training set to a feature subset via the shared evaluation engine.

mod ga;
mod rl;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::agents::LearningSchedule;
use crate::error::{Error, Result};
use crate::evaluation::{EvalStats, Evaluator, RewardSpec};
use crate::subset::FeatureSubset;

pub use ga::{run_ga, two_point_crossover};
pub use rl::{run_clean, run_marl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WrapperMethod {
    Marl,
    Clean,
    Ga,
}

/// GA parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub population_size: usize,
    pub num_generations: usize,
    pub tournament_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// Per-bit flip rate; defaults to 1/f when unset.
    pub mutation_rate: Option<f64>,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population_size: 50,
            num_generations: 100,
            tournament_size: 3,
            crossover_prob: 0.7,
            mutation_prob: 1.0,
            mutation_rate: None,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidArgument(
                "ga.population_size must be >= 2".into(),
            ));
        }
        if self.num_generations == 0 {
            return Err(Error::InvalidArgument(
                "ga.num_generations must be >= 1".into(),
            ));
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return Err(Error::InvalidArgument(format!(
                "ga.tournament_size must be in [1, population_size], got {}",
                self.tournament_size
            )));
        }
        for (name, p) in [
            ("ga.crossover_prob", self.crossover_prob),
            ("ga.mutation_prob", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be in [0,1], got {p}"
                )));
            }
        }
        if let Some(r) = self.mutation_rate {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidArgument(format!(
                    "ga.mutation_rate must be in [0,1], got {r}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WrapperConfig {
    pub method: WrapperMethod,
    pub num_episodes: usize,
    pub schedule: LearningSchedule,
    pub reward_spec: RewardSpec,
    pub ga: GaParams,
    pub seed: u64,
}

impl WrapperConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_episodes == 0 {
            return Err(Error::InvalidArgument("num_episodes must be >= 1".into()));
        }
        self.ga.validate()
    }
}

/// One curve record per episode (or GA generation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: usize,
    pub global_reward: f64,
    pub subset_size: usize,
    pub epsilon: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub points: Vec<CurvePoint>,
}

impl LearningCurve {
    pub fn push(&mut self, point: CurvePoint) {
        self.points.push(point);
    }

    /// CSV serialisation: episode, global_reward, subset_size, epsilon, alpha.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io_err = |source| Error::Io {
            path: "<writer>".into(),
            source,
        };
        writeln!(out, "episode,global_reward,subset_size,epsilon,alpha").map_err(io_err)?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{}",
                p.episode, p.global_reward, p.subset_size, p.epsilon, p.alpha
            )
            .map_err(io_err)?;
        }
        Ok(())
    }
}

/// Per-episode counters for the counterfactual work bound and the
/// zero-counterfactual property.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeDiag {
    pub episode: usize,
    /// Reward requests issued during the episode (cache hits included).
    pub reward_queries: u64,
    /// Agents whose counterfactual action differed from their greedy action.
    pub counterfactual_count: usize,
    /// Largest |C_i| seen this episode.
    pub max_abs_counterfactual: f64,
    /// Cross-validation passes actually computed during the episode.
    pub cv_evaluations: u64,
}

/// Result of one wrapper run.
#[derive(Debug, Clone)]
pub struct WrapperRun {
    pub subset: FeatureSubset,
    pub curve: LearningCurve,
    /// Populated by CLEAN; empty for MARL and GA.
    pub episode_diags: Vec<EpisodeDiag>,
    pub eval_stats: EvalStats,
}

/// Dispatch on the configured method.
pub fn run_wrapper(evaluator: &Evaluator, config: &WrapperConfig) -> Result<WrapperRun> {
    config.validate()?;
    match config.method {
        WrapperMethod::Marl => run_marl(evaluator, config),
        WrapperMethod::Clean => run_clean(evaluator, config),
        WrapperMethod::Ga => run_ga(evaluator, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_csv_has_the_contracted_columns() {
        let mut curve = LearningCurve::default();
        curve.push(CurvePoint {
            episode: 0,
            global_reward: 0.5,
            subset_size: 3,
            epsilon: 0.15,
            alpha: 0.2,
        });
        curve.push(CurvePoint {
            episode: 1,
            global_reward: 0.75,
            subset_size: 2,
            epsilon: 0.149925,
            alpha: 0.1999,
        });
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "episode,global_reward,subset_size,epsilon,alpha");
        assert_eq!(lines[1], "0,0.5,3,0.15,0.2");
        assert_eq!(lines[2], "1,0.75,2,0.149925,0.1999");
    }

    #[test]
    fn invalid_ga_params_are_rejected() {
        let bad = GaParams {
            tournament_size: 51,
            ..GaParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = GaParams {
            crossover_prob: 1.5,
            ..GaParams::default()
        };
        assert!(bad.validate().is_err());
        assert!(GaParams::default().validate().is_ok());
    }
}
