//! Filter selection: univariate correlation-based ranking (squared Pearson
//! correlation with the class) and greedy minimal-redundancy
//! maximal-relevance selection over discretized columns.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::subset::FeatureSubset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature: usize,
    pub score: f64,
}

/// Pearson correlation of a column with the 0/1 labels; zero-variance
/// columns (either side) score 0 rather than NaN.
pub fn pearson(x: &[f64], labels: &[u8]) -> f64 {
    debug_assert_eq!(x.len(), labels.len());
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = labels.iter().map(|&y| f64::from(y)).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(labels.iter()) {
        let dx = xi - mean_x;
        let dy = f64::from(yi) - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Squared Pearson correlation of every feature with the class, in feature
/// order. Squaring keeps negatively correlated features in play.
pub fn ucfs_scores(train: &Dataset) -> Vec<FeatureScore> {
    (0..train.num_features())
        .map(|j| FeatureScore {
            feature: j,
            score: pearson(train.column(j), train.labels()).powi(2),
        })
        .collect()
}

/// Top n features by squared correlation; ties resolve to the lower index.
pub fn ucfs(train: &Dataset, n_select: usize) -> Result<FeatureSubset> {
    check_n_select(n_select, train.num_features())?;
    let mut scores = ucfs_scores(train);
    scores.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then(a.feature.cmp(&b.feature))
    });
    Ok(FeatureSubset::from_indices(
        train.num_features(),
        scores[..n_select].iter().map(|s| s.feature),
    ))
}

fn check_n_select(n_select: usize, f: usize) -> Result<()> {
    if n_select == 0 || n_select > f {
        return Err(Error::InvalidArgument(format!(
            "n_select must be in [1, {f}], got {n_select}"
        )));
    }
    Ok(())
}

fn to_discrete(col: &[f64], index: usize) -> Result<Vec<i64>> {
    col.iter()
        .map(|&v| {
            if v.is_finite() && v.fract() == 0.0 {
                Ok(v as i64)
            } else {
                Err(Error::NonDiscreteColumn(index))
            }
        })
        .collect()
}

/// Plug-in mutual information of two integer-valued columns, in nats.
/// Joint counts accumulate in key order so the sum is deterministic.
pub fn mutual_information(a: &[i64], b: &[i64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let mut joint: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut ma: BTreeMap<i64, usize> = BTreeMap::new();
    let mut mb: BTreeMap<i64, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b.iter()) {
        *joint.entry((x, y)).or_insert(0) += 1;
        *ma.entry(x).or_insert(0) += 1;
        *mb.entry(y).or_insert(0) += 1;
    }
    let mut mi = 0.0;
    for (&(x, y), &c) in &joint {
        let pxy = c as f64 / n;
        let px = ma[&x] as f64 / n;
        let py = mb[&y] as f64 / n;
        mi += pxy * (pxy / (px * py)).ln();
    }
    mi
}

/// Greedy mRMR with the difference (MID) criterion: the first pick
/// maximises I(F; C); every next pick maximises
/// I(F; C) - (1/|S|) * sum_{j in S} I(F; F_j). Deterministic; ties resolve
/// to the lower feature index.
pub fn mrmr(train_discrete: &Dataset, n_select: usize) -> Result<FeatureSubset> {
    let picks = mrmr_scores(train_discrete, n_select)?;
    Ok(FeatureSubset::from_indices(
        train_discrete.num_features(),
        picks.iter().map(|p| p.feature),
    ))
}

/// The mRMR picks in selection order, each with the incremental score it
/// was chosen at (relevance for the first pick, relevance minus mean
/// redundancy afterwards).
pub fn mrmr_scores(train_discrete: &Dataset, n_select: usize) -> Result<Vec<FeatureScore>> {
    let f = train_discrete.num_features();
    check_n_select(n_select, f)?;
    let columns: Vec<Vec<i64>> = (0..f)
        .map(|j| to_discrete(train_discrete.column(j), j))
        .collect::<Result<_>>()?;
    let class: Vec<i64> = train_discrete.labels().iter().map(|&y| i64::from(y)).collect();

    let relevance: Vec<f64> = columns.iter().map(|c| mutual_information(c, &class)).collect();

    let mut picks: Vec<FeatureScore> = Vec::with_capacity(n_select);
    let mut remaining: Vec<usize> = (0..f).collect();
    // Running sum of I(candidate; already-selected), extended by one term
    // per round.
    let mut redundancy_sum = vec![0.0; f];

    let first = *remaining
        .iter()
        .max_by(|&&a, &&b| {
            relevance[a]
                .partial_cmp(&relevance[b])
                .unwrap()
                .then(b.cmp(&a))
        })
        .unwrap();
    picks.push(FeatureScore {
        feature: first,
        score: relevance[first],
    });
    remaining.retain(|&j| j != first);

    while picks.len() < n_select {
        let last = picks.last().unwrap().feature;
        for &j in &remaining {
            redundancy_sum[j] += mutual_information(&columns[j], &columns[last]);
        }
        let denom = picks.len() as f64;
        let next = *remaining
            .iter()
            .max_by(|&&a, &&b| {
                let sa = relevance[a] - redundancy_sum[a] / denom;
                let sb = relevance[b] - redundancy_sum[b] / denom;
                sa.partial_cmp(&sb).unwrap().then(b.cmp(&a))
            })
            .unwrap();
        picks.push(FeatureScore {
            feature: next,
            score: relevance[next] - redundancy_sum[next] / denom,
        });
        remaining.retain(|&j| j != next);
    }
    Ok(picks)
}

/// Score-table export: feature_name, score, rank (rank 1 = highest score).
pub fn write_score_csv<W: Write>(
    scores: &[FeatureScore],
    names: &[String],
    mut out: W,
) -> Result<()> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .score
            .partial_cmp(&scores[a].score)
            .unwrap()
            .then(scores[a].feature.cmp(&scores[b].feature))
    });
    let io_err = |source| Error::Io {
        path: "<writer>".into(),
        source,
    };
    writeln!(out, "feature_name,score,rank").map_err(io_err)?;
    for (rank, &i) in order.iter().enumerate() {
        writeln!(
            out,
            "{},{},{}",
            names[scores[i].feature],
            scores[i].score,
            rank + 1
        )
        .map_err(io_err)?;
    }
    Ok(())
}
