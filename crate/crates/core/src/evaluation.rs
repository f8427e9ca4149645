//! Cross-validated performance of a feature subset and the size-penalised
//! reward built on it. This is the hot path shared by every wrapper; it
//! keeps one all-pairs distance cache per context so a one-feature change
//! never pays a full pass over all features, and memoises rewards by
//! subset bitmask.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::classifier::{DistanceCache, KnnModel};
use crate::dataset::{Dataset, FoldPartition};
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, confusion, PerformanceReport};
use crate::subset::FeatureSubset;

/// Which performance measure drives learning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    Precision,
    Recall,
    #[default]
    FScore,
}

impl Metric {
    pub fn of(&self, report: &PerformanceReport) -> f64 {
        match self {
            Metric::Accuracy => report.accuracy,
            Metric::Precision => report.precision,
            Metric::Recall => report.recall,
            Metric::FScore => report.f_score,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "accuracy" => Ok(Metric::Accuracy),
            "precision" => Ok(Metric::Precision),
            "recall" => Ok(Metric::Recall),
            "f_score" => Ok(Metric::FScore),
            other => Err(Error::InvalidArgument(format!(
                "unknown metric `{other}` (expected accuracy, precision, recall or f_score)"
            ))),
        }
    }
}

/// Subset-size boundary and the metric to optimise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSpec {
    pub boundary: usize,
    pub optimize_metric: Metric,
}

impl RewardSpec {
    pub fn new(boundary: usize, optimize_metric: Metric) -> Result<Self> {
        if boundary == 0 {
            return Err(Error::InvalidArgument("boundary must be >= 1".into()));
        }
        Ok(RewardSpec {
            boundary,
            optimize_metric,
        })
    }
}

/// Outcome of one reward evaluation: r = P when |S| <= b, else P / (|S|/b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardOutcome {
    pub performance: f64,
    pub subset_size: usize,
    pub cost: Option<f64>,
    pub reward: f64,
}

/// Apply the size penalty to a raw performance value.
pub fn shape_reward(performance: f64, subset_size: usize, boundary: usize) -> RewardOutcome {
    if subset_size <= boundary {
        RewardOutcome {
            performance,
            subset_size,
            cost: None,
            reward: performance,
        }
    } else {
        let cost = subset_size as f64 / boundary as f64;
        RewardOutcome {
            performance,
            subset_size,
            cost: Some(cost),
            reward: performance / cost,
        }
    }
}

/// Counters observable from outside; correctness never depends on them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EvalStats {
    /// Reward requests (cache hits included).
    pub reward_queries: u64,
    /// Cross-validation passes actually computed.
    pub cv_evaluations: u64,
    /// Requests answered from the memo table.
    pub cache_hits: u64,
}

impl EvalStats {
    pub fn hit_rate(&self) -> f64 {
        if self.reward_queries == 0 {
            0.0
        } else {
            self.cache_hits as f64 / self.reward_queries as f64
        }
    }
}

/// A movable cross-validation position: the all-pairs distance cache for
/// one subset over the training set. Cloning is cheap (one matrix), which
/// is what lets counterfactual evaluations run independently in parallel.
#[derive(Debug, Clone)]
pub struct CvContext {
    cache: DistanceCache,
}

impl CvContext {
    pub fn subset(&self) -> &FeatureSubset {
        self.cache.active()
    }
}

/// Shared evaluation engine: training data, fold partition, classifier
/// parameters, reward spec, and the reward memo table.
pub struct Evaluator {
    train: Dataset,
    folds: FoldPartition,
    model: KnnModel,
    spec: RewardSpec,
    cache: Mutex<HashMap<FeatureSubset, RewardOutcome>>,
    queries: AtomicU64,
    evals: AtomicU64,
    hits: AtomicU64,
}

impl Evaluator {
    pub fn new(
        train: Dataset,
        folds: FoldPartition,
        model: KnnModel,
        spec: RewardSpec,
    ) -> Result<Self> {
        if folds.num_rows() != train.num_rows() {
            return Err(Error::InvalidArgument(format!(
                "fold partition covers {} rows, training set has {}",
                folds.num_rows(),
                train.num_rows()
            )));
        }
        let max_fold = folds.sizes().into_iter().max().unwrap_or(0);
        if model.k_neighbors() > train.num_rows() - max_fold {
            return Err(Error::TooFewTrainingRows {
                k: model.k_neighbors(),
                train: train.num_rows() - max_fold,
            });
        }
        Ok(Evaluator {
            train,
            folds,
            model,
            spec,
            cache: Mutex::new(HashMap::new()),
            queries: AtomicU64::new(0),
            evals: AtomicU64::new(0),
            hits: AtomicU64::new(0),
        })
    }

    pub fn train(&self) -> &Dataset {
        &self.train
    }

    pub fn folds(&self) -> &FoldPartition {
        &self.folds
    }

    pub fn spec(&self) -> &RewardSpec {
        &self.spec
    }

    pub fn num_features(&self) -> usize {
        self.train.num_features()
    }

    pub fn stats(&self) -> EvalStats {
        EvalStats {
            reward_queries: self.queries.load(Ordering::Relaxed),
            cv_evaluations: self.evals.load(Ordering::Relaxed),
            cache_hits: self.hits.load(Ordering::Relaxed),
        }
    }

    /// Drop all memoised rewards (used between repetitions, when folds change).
    pub fn clear_cache(&self) {
        self.cache.lock().unwrap().clear();
    }

    /// Build a context positioned at `subset`.
    pub fn context(&self, subset: &FeatureSubset) -> CvContext {
        CvContext {
            cache: DistanceCache::new(&self.train, &self.train, subset),
        }
    }

    /// Move a context to a different subset (toggles only the difference).
    pub fn retarget(&self, ctx: &mut CvContext, subset: &FeatureSubset) {
        ctx.cache.retarget(&self.train, &self.train, subset);
    }

    /// Clone a context and flip one feature; the cheap path behind
    /// counterfactual evaluation.
    pub fn toggled(&self, ctx: &CvContext, feature: usize, on: bool) -> Result<CvContext> {
        let mut out = ctx.clone();
        out.cache.toggle(&self.train, &self.train, feature, on)?;
        Ok(out)
    }

    /// k-fold cross-validated value of the optimised metric: for every fold
    /// j, rows of fold j are scored against the other k-1 folds, and the
    /// per-fold metrics are averaged unweighted. The empty subset scores 0
    /// without invoking the classifier.
    pub fn cv_performance(&self, subset: &FeatureSubset) -> Result<f64> {
        if subset.is_empty() {
            return Ok(0.0);
        }
        let ctx = self.context(subset);
        self.cv_performance_ctx(&ctx)
    }

    fn cv_performance_ctx(&self, ctx: &CvContext) -> Result<f64> {
        if ctx.subset().is_empty() {
            return Ok(0.0);
        }
        self.evals.fetch_add(1, Ordering::Relaxed);
        let reports = self.fold_reports_ctx(ctx)?;
        let total: f64 = reports.iter().map(|r| self.spec.optimize_metric.of(r)).sum();
        Ok(total / reports.len() as f64)
    }

    /// Full per-fold reports for a subset; diagnostic view of the same pass
    /// cv_performance averages. Only the optimised metric feeds the reward.
    pub fn cv_fold_reports(&self, subset: &FeatureSubset) -> Result<Vec<PerformanceReport>> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        let ctx = self.context(subset);
        self.fold_reports_ctx(&ctx)
    }

    fn fold_reports_ctx(&self, ctx: &CvContext) -> Result<Vec<PerformanceReport>> {
        let folds = &self.folds;
        let labels = self.train.labels();
        let predictions = self.model.predict_from_cache(&ctx.cache, labels, |q, t| {
            folds.fold_of(q) != folds.fold_of(t)
        })?;
        (0..folds.k())
            .map(|j| {
                let rows = folds.fold_rows(j);
                let pred: Vec<u8> = rows.iter().map(|&r| predictions[r]).collect();
                let actual: Vec<u8> = rows.iter().map(|&r| labels[r]).collect();
                compute_metrics(&confusion(&pred, &actual)?)
            })
            .collect()
    }

    /// Memoised reward of a subset, computing the cross-validation pass on a
    /// fresh context when needed.
    pub fn reward(&self, subset: &FeatureSubset) -> Result<RewardOutcome> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        if let Some(hit) = self.cache.lock().unwrap().get(subset) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(*hit);
        }
        let p = if subset.is_empty() {
            0.0
        } else {
            let ctx = self.context(subset);
            self.cv_performance_ctx(&ctx)?
        };
        let outcome = shape_reward(p, subset.len(), self.spec.boundary);
        self.cache.lock().unwrap().insert(subset.clone(), outcome);
        Ok(outcome)
    }

    /// Memoised reward using an already-positioned context on a miss.
    /// Duplicate concurrent computation of the same key is harmless; the
    /// evaluation is pure, so both writers insert the same value.
    pub fn reward_with_context(&self, ctx: &CvContext) -> Result<RewardOutcome> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let subset = ctx.subset();
        if let Some(hit) = self.cache.lock().unwrap().get(subset) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(*hit);
        }
        let p = self.cv_performance_ctx(ctx)?;
        let outcome = shape_reward(p, subset.len(), self.spec.boundary);
        self.cache.lock().unwrap().insert(subset.clone(), outcome);
        Ok(outcome)
    }
}
