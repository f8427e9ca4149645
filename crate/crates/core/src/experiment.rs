//! End-to-end experiment orchestration: for every method, boundary and
//! repetition — fresh stratified split, folds on the training side,
//! optional prefilters, selection, then a single evaluation of the learnt
//! subset on the untouched test set. Subset decisions only ever see the
//! training partition.

use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::KnnModel;
use crate::config::{DatasetConfig, ResolvedConfig, RunConfig};
use crate::dataset::{
    discretize_bins, load_csv, make_folds, make_synthetic, mean_normalize, train_test_split,
    Dataset, SplitSpec,
};
use crate::error::{Error, Result};
use crate::evaluation::{Evaluator, RewardSpec};
use crate::filters::{mrmr, ucfs};
use crate::metrics::{compute_metrics, confusion, PerformanceReport};
use crate::report::{AggregateTable, ExperimentReport, ReportRow};
use crate::rng::derive_seed;
use crate::subset::FeatureSubset;
use crate::wrappers::{run_wrapper, LearningCurve, WrapperConfig, WrapperMethod};

const SALT_SPLIT: u64 = 1;
const SALT_FOLDS: u64 = 2;
const SALT_WRAPPER_BASE: u64 = 0x100;

/// The nine compared selection methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "baseline")]
    Baseline,
    #[serde(rename = "ucfs")]
    UCfs,
    #[serde(rename = "mrmr")]
    Mrmr,
    #[serde(rename = "ga")]
    Ga,
    #[serde(rename = "marl")]
    Marl,
    #[serde(rename = "clean")]
    Clean,
    #[serde(rename = "ga+ucfs")]
    GaUcfs,
    #[serde(rename = "marl+ucfs")]
    MarlUcfs,
    #[serde(rename = "clean+ucfs")]
    CleanUcfs,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Baseline,
        Method::UCfs,
        Method::Mrmr,
        Method::Ga,
        Method::Marl,
        Method::Clean,
        Method::GaUcfs,
        Method::MarlUcfs,
        Method::CleanUcfs,
    ];

    pub fn token(&self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::UCfs => "ucfs",
            Method::Mrmr => "mrmr",
            Method::Ga => "ga",
            Method::Marl => "marl",
            Method::Clean => "clean",
            Method::GaUcfs => "ga+ucfs",
            Method::MarlUcfs => "marl+ucfs",
            Method::CleanUcfs => "clean+ucfs",
        }
    }

    pub fn is_baseline(&self) -> bool {
        *self == Method::Baseline
    }

    /// Hybrids run the uCFS prefilter before their wrapper.
    pub fn has_ucfs_prefilter(&self) -> bool {
        matches!(self, Method::GaUcfs | Method::MarlUcfs | Method::CleanUcfs)
    }

    pub fn wrapper(&self) -> Option<WrapperMethod> {
        match self {
            Method::Ga | Method::GaUcfs => Some(WrapperMethod::Ga),
            Method::Marl | Method::MarlUcfs => Some(WrapperMethod::Marl),
            Method::Clean | Method::CleanUcfs => Some(WrapperMethod::Clean),
            _ => None,
        }
    }

    fn index(&self) -> usize {
        Method::ALL.iter().position(|m| m == self).unwrap()
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.token() == lower)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method `{s}`")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

/// One method at one boundary, with its prefilter settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub method: Method,
    /// None only for the baseline.
    pub boundary: Option<usize>,
    pub hybrid_prefilter_size: Option<usize>,
    pub prefilter_cap: Option<usize>,
}

impl MethodSpec {
    pub fn validate(&self) -> Result<()> {
        match (self.method.is_baseline(), self.boundary) {
            (false, None) => {
                return Err(Error::InvalidArgument(format!(
                    "method {} requires a boundary",
                    self.method
                )))
            }
            (false, Some(0)) => {
                return Err(Error::InvalidArgument("boundary must be >= 1".into()))
            }
            _ => {}
        }
        if self.method.has_ucfs_prefilter() {
            if let (Some(size), Some(b)) = (self.hybrid_prefilter_size, self.boundary) {
                if size < b {
                    return Err(Error::InvalidArgument(format!(
                        "hybrid_prefilter_size {size} is below the boundary {b}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Everything one (method, boundary, repetition) job produced.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub row: ReportRow,
    pub curve: Option<LearningCurve>,
}

/// Run one repetition of one method. The repetition's seeds all derive from
/// hash(master_seed, rep), so every method sees the same split and folds
/// within a repetition.
pub fn run_single(
    data: &Dataset,
    spec: &MethodSpec,
    cfg: &ResolvedConfig,
    rep: usize,
) -> Result<SingleRun> {
    spec.validate()?;
    let rep_seed = derive_seed(cfg.master_seed, rep as u64);
    let split = SplitSpec::new(cfg.lambda, derive_seed(rep_seed, SALT_SPLIT))?;
    let (train, test) = train_test_split(data, &split)?;

    let mut curve = None;
    let selected_original: Vec<usize> = if spec.method.is_baseline() {
        (0..data.num_features()).collect()
    } else {
        let boundary = spec.boundary.expect("validated above");
        // Indices into the original column space for the surviving features.
        let mut candidates: Vec<usize> = (0..train.num_features()).collect();
        let mut work_train = train.clone();

        let narrow = |work: &Dataset, candidates: &[usize], keep: usize| -> Result<(Dataset, Vec<usize>)> {
            let local = ucfs(work, keep)?;
            let kept = local.indices();
            Ok((
                work.select_columns(&kept)?,
                kept.iter().map(|&i| candidates[i]).collect(),
            ))
        };

        if let Some(cap) = spec.prefilter_cap {
            if cap < work_train.num_features() {
                let (w, c) = narrow(&work_train, &candidates, cap)?;
                work_train = w;
                candidates = c;
            }
        }
        if spec.method.has_ucfs_prefilter() {
            let size = spec
                .hybrid_prefilter_size
                .unwrap_or(10 * boundary)
                .min(work_train.num_features());
            if size < work_train.num_features() {
                let (w, c) = narrow(&work_train, &candidates, size)?;
                work_train = w;
                candidates = c;
            }
        }

        let local_subset = match spec.method {
            Method::UCfs => ucfs(&work_train, boundary)?,
            Method::Mrmr => {
                let discrete = discretize_bins(&work_train, cfg.bins, cfg.binning)?;
                mrmr(&discrete, boundary)?
            }
            _ => {
                let wrapper = spec.method.wrapper().expect("remaining methods wrap");
                let folds = make_folds(&work_train, cfg.folds, derive_seed(rep_seed, SALT_FOLDS))?;
                let evaluator = Evaluator::new(
                    work_train.clone(),
                    folds,
                    KnnModel::new(cfg.knn_k)?,
                    RewardSpec::new(boundary, cfg.optimize_metric)?,
                )?;
                let wrapper_config = WrapperConfig {
                    method: wrapper,
                    num_episodes: match wrapper {
                        WrapperMethod::Marl => cfg.marl_episodes,
                        WrapperMethod::Clean => cfg.clean_episodes,
                        WrapperMethod::Ga => cfg.ga.num_generations,
                    },
                    schedule: cfg.schedule,
                    reward_spec: *evaluator.spec(),
                    ga: cfg.ga,
                    seed: derive_seed(rep_seed, SALT_WRAPPER_BASE + spec.method.index() as u64),
                };
                let run = run_wrapper(&evaluator, &wrapper_config)?;
                curve = Some(run.curve);
                run.subset
            }
        };
        local_subset.iter().map(|i| candidates[i]).collect()
    };

    let metrics = evaluate_on_test(&train, &test, &selected_original, cfg.knn_k)?;
    Ok(SingleRun {
        row: ReportRow {
            method: spec.method,
            boundary: spec.boundary,
            rep,
            subset_size: selected_original.len(),
            selected_features: selected_original,
            metrics,
            curve_ref: None,
        },
        curve,
    })
}

/// Train on the full training set restricted to the subset, score all four
/// measures on the test set. An empty subset scores zero by convention.
fn evaluate_on_test(
    train: &Dataset,
    test: &Dataset,
    selected: &[usize],
    knn_k: usize,
) -> Result<PerformanceReport> {
    if selected.is_empty() {
        return Ok(PerformanceReport::zeros());
    }
    let subset = FeatureSubset::from_indices(train.num_features(), selected.iter().copied());
    let model = KnnModel::new(knn_k)?;
    let predictions = model.predict(train, &subset, test)?;
    compute_metrics(&confusion(&predictions, test.labels())?)
}

/// All repetitions of one method spec, in repetition order.
pub fn run_method(data: &Dataset, spec: &MethodSpec, cfg: &ResolvedConfig) -> Result<Vec<SingleRun>> {
    (0..cfg.repetitions)
        .map(|rep| run_single(data, spec, cfg, rep))
        .collect()
}

/// A named learning-curve artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedCurve {
    pub name: String,
    pub curve: LearningCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: ExperimentReport,
    pub curves: Vec<NamedCurve>,
}

pub type ProgressFn = Arc<dyn Fn(u64, u64) + Send + Sync>;

/// Load (or generate) the dataset named by the config, normalizing when
/// asked to.
pub fn load_dataset(dataset: &DatasetConfig, normalize: bool) -> Result<Dataset> {
    let data = match dataset {
        DatasetConfig::Csv { path, label_column } => load_csv(path, label_column)?,
        DatasetConfig::Synthetic {
            features,
            rows,
            informative,
            num_informative,
            noise,
            seed,
        } => {
            let informative: Vec<usize> = match (informative, num_informative) {
                (Some(list), _) => list.clone(),
                (None, Some(n)) => (0..*n).collect(),
                (None, None) => Vec::new(),
            };
            make_synthetic(*features, *rows, &informative, *noise, *seed)?
        }
    };
    Ok(if normalize { mean_normalize(&data) } else { data })
}

/// Number of (method, boundary, repetition) jobs a config will run.
pub fn planned_jobs(cfg: &ResolvedConfig) -> u64 {
    let non_baseline = cfg.methods.iter().filter(|m| !m.is_baseline()).count();
    let baseline = usize::from(cfg.methods.iter().any(|m| m.is_baseline()));
    ((non_baseline * cfg.boundaries.len() + baseline) * cfg.repetitions) as u64
}

/// Checks that need the loaded dataset: stratification and fold feasibility
/// under the configured split.
fn preflight(data: &Dataset, cfg: &ResolvedConfig) -> Result<()> {
    let (neg, pos) = data.class_counts();
    let train_count = |class_count: usize| {
        class_count - ((cfg.lambda * class_count as f64 + 0.5).floor() as usize)
    };
    if neg < 2 || pos < 2 {
        return Err(Error::config(
            "dataset",
            format!("both classes need >= 2 rows (have {neg} negative, {pos} positive)"),
        ));
    }
    let min_train_class = train_count(neg).min(train_count(pos));
    if cfg.folds > min_train_class {
        return Err(Error::config(
            "experiment.folds",
            format!(
                "k = {} exceeds the smaller class's training rows ({min_train_class}) under lambda = {}",
                cfg.folds, cfg.lambda
            ),
        ));
    }
    let train_rows = train_count(neg) + train_count(pos);
    let max_fold = train_rows.div_ceil(cfg.folds);
    if cfg.knn_k > train_rows.saturating_sub(max_fold) {
        return Err(Error::config(
            "knn.k",
            format!(
                "k_neighbors = {} exceeds the rows available to a fold's training side ({})",
                cfg.knn_k,
                train_rows.saturating_sub(max_fold)
            ),
        ));
    }
    Ok(())
}

fn curve_name(method: Method, boundary: Option<usize>, rep: usize) -> String {
    match boundary {
        Some(b) => format!("curves/{}_b{}_rep{}.csv", method.token(), b, rep),
        None => format!("curves/{}_rep{}.csv", method.token(), rep),
    }
}

/// Run the whole configured experiment. Jobs are independent and execute in
/// parallel; results assemble in a fixed order so output is deterministic.
pub fn run_experiment(config: &RunConfig, progress: Option<ProgressFn>) -> Result<RunOutcome> {
    let cfg = config.validate()?;
    let data = load_dataset(&config.dataset, cfg.normalize)?;
    preflight(&data, &cfg)?;

    if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
        pool.install(|| run_jobs(&data, &cfg, progress))
    } else {
        run_jobs(&data, &cfg, progress)
    }
}

fn run_jobs(data: &Dataset, cfg: &ResolvedConfig, progress: Option<ProgressFn>) -> Result<RunOutcome> {
    let mut jobs: Vec<(MethodSpec, usize)> = Vec::new();
    for method in &cfg.methods {
        if method.is_baseline() {
            for rep in 0..cfg.repetitions {
                jobs.push((
                    MethodSpec {
                        method: *method,
                        boundary: None,
                        hybrid_prefilter_size: None,
                        prefilter_cap: None,
                    },
                    rep,
                ));
            }
        }
    }
    for &boundary in &cfg.boundaries {
        for method in &cfg.methods {
            if method.is_baseline() {
                continue;
            }
            for rep in 0..cfg.repetitions {
                jobs.push((
                    MethodSpec {
                        method: *method,
                        boundary: Some(boundary),
                        hybrid_prefilter_size: cfg.hybrid_prefilter_size,
                        prefilter_cap: cfg.prefilter_cap,
                    },
                    rep,
                ));
            }
        }
    }

    let total = jobs.len() as u64;
    let done = AtomicU64::new(0);
    let results: Vec<SingleRun> = jobs
        .par_iter()
        .map(|(spec, rep)| {
            let out = run_single(data, spec, cfg, *rep);
            let finished = done.fetch_add(1, Ordering::Relaxed) + 1;
            if let Some(cb) = &progress {
                cb(finished, total);
            }
            out
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(results.len());
    let mut curves = Vec::new();
    for run in results {
        let mut row = run.row;
        if let Some(curve) = run.curve {
            let name = curve_name(row.method, row.boundary, row.rep);
            row.curve_ref = Some(name.clone());
            curves.push(NamedCurve { name, curve });
        }
        rows.push(row);
    }

    let tables: Vec<AggregateTable> = cfg
        .boundaries
        .iter()
        .map(|&b| AggregateTable::from_rows(b, &cfg.methods, &rows))
        .collect();
    let rank = if cfg.methods.len() >= 2 {
        Some(crate::report::score_rank(&tables)?)
    } else {
        None
    };

    Ok(RunOutcome {
        report: ExperimentReport { rows, tables, rank },
        curves,
    })
}
