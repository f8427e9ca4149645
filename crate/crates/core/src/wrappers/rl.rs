//! The two reinforcement-learning wrappers. MARL trains every agent on the
//! shared global reward of the executed joint action. CLEAN keeps online
//! behaviour greedy and trains each agent on a private counterfactual:
//! C_i = G(a - a_i + c_i) - G(a), the reward delta from flipping only its
//! own bit.

use rayon::prelude::*;

use crate::agents::{epsilon_greedy_action, AgentTable};
use crate::error::{Error, Result};
use crate::evaluation::Evaluator;
use crate::rng::seeded_rng;
use crate::subset::FeatureSubset;

use super::{CurvePoint, EpisodeDiag, LearningCurve, WrapperConfig, WrapperMethod, WrapperRun};

pub fn run_marl(evaluator: &Evaluator, config: &WrapperConfig) -> Result<WrapperRun> {
    if config.method != WrapperMethod::Marl {
        return Err(Error::InvalidArgument("config.method must be MARL".into()));
    }
    let f = evaluator.num_features();
    let mut table = AgentTable::new(f);
    let mut schedule = config.schedule;
    let mut rng = seeded_rng(config.seed);
    let mut curve = LearningCurve::default();
    let mut ctx = evaluator.context(&FeatureSubset::empty(f));

    for episode in 0..config.num_episodes {
        let actions: Vec<u8> = (0..f)
            .map(|i| epsilon_greedy_action(&table, i, &schedule, &mut rng))
            .collect();
        let subset = FeatureSubset::from_actions(&actions);

        evaluator.retarget(&mut ctx, &subset);
        let outcome = evaluator.reward_with_context(&ctx)?;

        for (i, &action) in actions.iter().enumerate() {
            table.update(i, action, outcome.reward, schedule.alpha);
        }
        curve.push(CurvePoint {
            episode,
            global_reward: outcome.reward,
            subset_size: outcome.subset_size,
            epsilon: schedule.epsilon,
            alpha: schedule.alpha,
        });
        schedule.decay();
    }

    Ok(WrapperRun {
        subset: FeatureSubset::from_actions(&table.greedy_actions()),
        curve,
        episode_diags: Vec::new(),
        eval_stats: evaluator.stats(),
    })
}

pub fn run_clean(evaluator: &Evaluator, config: &WrapperConfig) -> Result<WrapperRun> {
    if config.method != WrapperMethod::Clean {
        return Err(Error::InvalidArgument("config.method must be CLEAN".into()));
    }
    let f = evaluator.num_features();
    let mut table = AgentTable::new(f);
    let mut schedule = config.schedule;
    let mut rng = seeded_rng(config.seed);
    let mut curve = LearningCurve::default();
    let mut diags = Vec::with_capacity(config.num_episodes);
    let mut ctx = evaluator.context(&FeatureSubset::empty(f));

    for episode in 0..config.num_episodes {
        let stats_before = evaluator.stats();

        // Online behaviour is purely greedy; exploration happens offline.
        let greedy: Vec<u8> = table.greedy_actions();
        let subset = FeatureSubset::from_actions(&greedy);
        evaluator.retarget(&mut ctx, &subset);
        let global = evaluator.reward_with_context(&ctx)?;

        // Private counterfactual draws, one per agent. Draws are serial so
        // the stream is order-independent of the parallel evaluation below.
        let counterfactuals: Vec<u8> = (0..f)
            .map(|i| epsilon_greedy_action(&table, i, &schedule, &mut rng))
            .collect();
        let flipped: Vec<usize> = (0..f).filter(|&i| counterfactuals[i] != greedy[i]).collect();

        // When c_i = a_i the delta is identically zero; no evaluation runs.
        // Otherwise the counterfactual joint action differs from a in
        // exactly bit i, so it is one toggle away from the shared context.
        let deltas: Vec<(usize, f64)> = flipped
            .par_iter()
            .map(|&i| {
                let on = counterfactuals[i] == 1;
                let toggled = evaluator.toggled(&ctx, i, on)?;
                let outcome = evaluator.reward_with_context(&toggled)?;
                Ok((i, outcome.reward - global.reward))
            })
            .collect::<Result<_>>()?;

        let mut max_abs = 0.0f64;
        let mut delta_iter = deltas.iter().peekable();
        for (i, &c_action) in counterfactuals.iter().enumerate() {
            let c_value = match delta_iter.peek() {
                Some(&&(agent, delta)) if agent == i => {
                    delta_iter.next();
                    delta
                }
                _ => 0.0,
            };
            max_abs = max_abs.max(c_value.abs());
            table.update(i, c_action, c_value, schedule.alpha);
        }

        let stats_after = evaluator.stats();
        diags.push(EpisodeDiag {
            episode,
            reward_queries: stats_after.reward_queries - stats_before.reward_queries,
            counterfactual_count: flipped.len(),
            max_abs_counterfactual: max_abs,
            cv_evaluations: stats_after.cv_evaluations - stats_before.cv_evaluations,
        });
        curve.push(CurvePoint {
            episode,
            global_reward: global.reward,
            subset_size: global.subset_size,
            epsilon: schedule.epsilon,
            alpha: schedule.alpha,
        });
        schedule.decay();
    }

    Ok(WrapperRun {
        subset: FeatureSubset::from_actions(&table.greedy_actions()),
        curve,
        episode_diags: diags,
        eval_stats: evaluator.stats(),
    })
}
