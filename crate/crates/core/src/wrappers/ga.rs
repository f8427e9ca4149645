//! Generational GA over subset bitstrings: tournament selection, two-point
//! crossover, per-bit mutation, single-individual elitism, fitness = the
//! same size-penalised reward the RL wrappers optimise.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evaluation::Evaluator;
use crate::rng::seeded_rng;
use crate::subset::FeatureSubset;

use super::{CurvePoint, LearningCurve, WrapperConfig, WrapperMethod, WrapperRun};

/// Swap the segment [cut1, cut2) between two parents. Cut points must be
/// internal positions (1..f) with cut1 <= cut2.
pub fn two_point_crossover(
    a: &FeatureSubset,
    b: &FeatureSubset,
    cut1: usize,
    cut2: usize,
) -> (FeatureSubset, FeatureSubset) {
    assert!(cut1 <= cut2 && cut2 <= a.num_features());
    let mut child_a = a.clone();
    let mut child_b = b.clone();
    for j in cut1..cut2 {
        if a.contains(j) != b.contains(j) {
            child_a.flip(j);
            child_b.flip(j);
        }
    }
    (child_a, child_b)
}

fn mutate<R: Rng>(individual: &mut FeatureSubset, rate: f64, rng: &mut R) {
    for j in 0..individual.num_features() {
        if rng.random::<f64>() < rate {
            individual.flip(j);
        }
    }
}

/// Best of `size` distinct individuals sampled uniformly; fitness ties
/// resolve to the lower population index.
fn tournament<R: Rng>(fitness: &[f64], size: usize, rng: &mut R) -> usize {
    let mut picks: Vec<usize> = sample(rng, fitness.len(), size).into_vec();
    picks.sort_unstable();
    *picks
        .iter()
        .max_by(|&&a, &&b| fitness[a].partial_cmp(&fitness[b]).unwrap().then(b.cmp(&a)))
        .unwrap()
}

fn best_index(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in fitness.iter().enumerate().skip(1) {
        if v > fitness[best] {
            best = i;
        }
    }
    best
}

pub fn run_ga(evaluator: &Evaluator, config: &WrapperConfig) -> Result<WrapperRun> {
    if config.method != WrapperMethod::Ga {
        return Err(Error::InvalidArgument("config.method must be GA".into()));
    }
    config.ga.validate()?;
    let f = evaluator.num_features();
    let params = config.ga;
    let mutation_rate = params.mutation_rate.unwrap_or(1.0 / f as f64);
    let mut rng = seeded_rng(config.seed);

    let mut population: Vec<FeatureSubset> = (0..params.population_size)
        .map(|_| {
            let bits: Vec<u8> = (0..f).map(|_| rng.random_range(0..2u8)).collect();
            FeatureSubset::from_actions(&bits)
        })
        .collect();
    let mut fitness = evaluate(evaluator, &population)?;

    let mut best_ever = population[best_index(&fitness)].clone();
    let mut best_ever_fitness = fitness[best_index(&fitness)];

    let mut curve = LearningCurve::default();
    for generation in 0..params.num_generations {
        let elite = best_index(&fitness);
        let mut next = Vec::with_capacity(params.population_size);
        next.push(population[elite].clone());
        while next.len() < params.population_size {
            let p1 = tournament(&fitness, params.tournament_size, &mut rng);
            let p2 = tournament(&fitness, params.tournament_size, &mut rng);
            let (mut c1, mut c2) = if f >= 3 && rng.random::<f64>() < params.crossover_prob {
                let cuts = sample(&mut rng, f - 1, 2);
                let (mut a, mut b) = (cuts.index(0) + 1, cuts.index(1) + 1);
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                two_point_crossover(&population[p1], &population[p2], a, b)
            } else {
                (population[p1].clone(), population[p2].clone())
            };
            if rng.random::<f64>() < params.mutation_prob {
                mutate(&mut c1, mutation_rate, &mut rng);
            }
            if rng.random::<f64>() < params.mutation_prob {
                mutate(&mut c2, mutation_rate, &mut rng);
            }
            next.push(c1);
            if next.len() < params.population_size {
                next.push(c2);
            }
        }
        population = next;
        fitness = evaluate(evaluator, &population)?;

        let gen_best = best_index(&fitness);
        if fitness[gen_best] > best_ever_fitness {
            best_ever_fitness = fitness[gen_best];
            best_ever = population[gen_best].clone();
        }
        curve.push(CurvePoint {
            episode: generation,
            global_reward: fitness[gen_best],
            subset_size: population[gen_best].len(),
            epsilon: 0.0,
            alpha: 0.0,
        });
    }

    Ok(WrapperRun {
        subset: best_ever,
        curve,
        episode_diags: Vec::new(),
        eval_stats: evaluator.stats(),
    })
}

fn evaluate(evaluator: &Evaluator, population: &[FeatureSubset]) -> Result<Vec<f64>> {
    population
        .par_iter()
        .map(|individual| Ok(evaluator.reward(individual)?.reward))
        .collect()
}
