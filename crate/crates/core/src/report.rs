//! Per-repetition report rows, aggregate tables (mean and standard
//! deviation per column), and the score-based ranking analysis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::Method;
use crate::metrics::PerformanceReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: Method,
    /// None for the baseline (which ignores the boundary).
    pub boundary: Option<usize>,
    pub rep: usize,
    pub subset_size: usize,
    /// Selected feature indices in the original dataset's column space.
    pub selected_features: Vec<usize>,
    pub metrics: PerformanceReport,
    pub curve_ref: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
}

/// Mean and sample (n-1) standard deviation; a single value has sd 0.
pub fn stat(values: &[f64]) -> Stat {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Stat { mean, sd }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodAggregate {
    pub method: Method,
    pub num_features: Stat,
    pub accuracy: Stat,
    pub precision: Stat,
    pub recall: Stat,
    pub f_score: Stat,
}

/// One table per boundary, one row per
/// method, mean (sd) per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateTable {
    pub boundary: usize,
    pub rows: Vec<MethodAggregate>,
}

impl AggregateTable {
    /// Aggregate the rows belonging to one boundary. Baseline rows carry no
    /// boundary and join every table. Methods keep the given order.
    pub fn from_rows(boundary: usize, methods: &[Method], rows: &[ReportRow]) -> Self {
        let aggregated = methods
            .iter()
            .map(|&method| {
                let matching: Vec<&ReportRow> = rows
                    .iter()
                    .filter(|r| {
                        r.method == method
                            && (r.boundary == Some(boundary) || r.boundary.is_none())
                    })
                    .collect();
                let pick = |f: &dyn Fn(&ReportRow) -> f64| {
                    stat(&matching.iter().map(|r| f(r)).collect::<Vec<f64>>())
                };
                MethodAggregate {
                    method,
                    num_features: pick(&|r| r.subset_size as f64),
                    accuracy: pick(&|r| r.metrics.accuracy),
                    precision: pick(&|r| r.metrics.precision),
                    recall: pick(&|r| r.metrics.recall),
                    f_score: pick(&|r| r.metrics.f_score),
                }
            })
            .collect();
        AggregateTable {
            boundary,
            rows: aggregated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRow {
    pub method: Method,
    pub features_score: u32,
    pub features_rank: u32,
    pub performance_score: u32,
    pub performance_rank: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTable {
    pub rows: Vec<RankRow>,
}

/// Competition score: 1 plus the number of strictly better values, so tied
/// methods all take the lower score of their block.
fn competition_scores(values: &[f64], lower_is_first: bool) -> Vec<u32> {
    values
        .iter()
        .map(|&v| {
            let better = values
                .iter()
                .filter(|&&o| if lower_is_first { o < v } else { o > v })
                .count();
            better as u32 + 1
        })
        .collect()
}

/// Score-based analysis across one or more aggregate tables.
///
/// Per table, the smallest mean subset size scores 1 and larger sizes score
/// higher (lower total is better). Per table and per measure in {accuracy,
/// precision, recall} the lowest value scores 1 and higher values score
/// higher (higher total is better); F-score is excluded as statistically
/// related to the others. Totals are summed over tables.
pub fn score_rank(tables: &[AggregateTable]) -> Result<RankTable> {
    let first = tables
        .first()
        .ok_or_else(|| Error::InvalidArgument("score_rank needs at least one table".into()))?;
    let methods: Vec<Method> = first.rows.iter().map(|r| r.method).collect();
    if methods.len() < 2 {
        return Err(Error::InvalidArgument(
            "score_rank needs at least two methods".into(),
        ));
    }
    for t in tables {
        let order: Vec<Method> = t.rows.iter().map(|r| r.method).collect();
        if order != methods {
            return Err(Error::InvalidArgument(
                "all tables must list the same methods in the same order".into(),
            ));
        }
    }

    let mut features_score = vec![0u32; methods.len()];
    let mut performance_score = vec![0u32; methods.len()];
    for t in tables {
        let sizes: Vec<f64> = t.rows.iter().map(|r| r.num_features.mean).collect();
        for (total, s) in features_score
            .iter_mut()
            .zip(competition_scores(&sizes, true))
        {
            *total += s;
        }
        for pick in [
            |r: &MethodAggregate| r.accuracy.mean,
            |r: &MethodAggregate| r.precision.mean,
            |r: &MethodAggregate| r.recall.mean,
        ] {
            let values: Vec<f64> = t.rows.iter().map(pick).collect();
            // ascending by performance: the worst method takes score 1
            let scores: Vec<u32> = values
                .iter()
                .map(|&v| values.iter().filter(|&&o| o < v).count() as u32 + 1)
                .collect();
            for (total, s) in performance_score.iter_mut().zip(scores) {
                *total += s;
            }
        }
    }

    let features_rank =
        competition_scores(&features_score.iter().map(|&s| f64::from(s)).collect::<Vec<_>>(), true);
    let performance_rank = competition_scores(
        &performance_score.iter().map(|&s| f64::from(s)).collect::<Vec<_>>(),
        false,
    );

    Ok(RankTable {
        rows: methods
            .iter()
            .enumerate()
            .map(|(i, &method)| RankRow {
                method,
                features_score: features_score[i],
                features_rank: features_rank[i],
                performance_score: performance_score[i],
                performance_rank: performance_rank[i],
            })
            .collect(),
    })
}

/// Everything an experiment run produces, minus the raw curve data (curves
/// are separate artifacts, referenced by name from the rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub tables: Vec<AggregateTable>,
    pub rank: Option<RankTable>,
}
