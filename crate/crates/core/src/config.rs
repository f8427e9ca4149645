//! Declarative run configuration. One file holds every knob an experiment
//! needs; unset values fall back to the standard defaults, and the
//! resolved form is echoed into the manifest so what ran is never implicit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::LearningSchedule;
use crate::classifier::KnnModel;
use crate::dataset::{BinningScheme, LabelColumn};
use crate::error::{Error, Result};
use crate::evaluation::Metric;
use crate::experiment::Method;
use crate::rng::fnv1a64;
use crate::wrappers::GaParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub knn: KnnConfig,
    #[serde(default)]
    pub reward: RewardConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub marl: MarlConfig,
    #[serde(default)]
    pub clean: CleanConfig,
    #[serde(default)]
    pub ga: GaConfig,
    #[serde(default)]
    pub discretize: DiscretizeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetConfig {
    Csv {
        path: String,
        label_column: LabelColumn,
    },
    Synthetic {
        features: usize,
        rows: usize,
        #[serde(default)]
        informative: Option<Vec<usize>>,
        #[serde(default)]
        num_informative: Option<usize>,
        #[serde(default = "default_noise")]
        noise: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn default_noise() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub methods: Vec<String>,
    pub boundaries: Vec<usize>,
    pub repetitions: usize,
    pub lambda: f64,
    pub folds: usize,
    pub master_seed: u64,
    /// 0 means "let the thread pool decide".
    pub workers: usize,
    pub normalize: bool,
    /// Optional uCFS cap applied to every selection method before anything
    /// else (the baseline is exempt).
    pub prefilter_cap: Option<usize>,
    /// Features the uCFS prefilter keeps for hybrid methods; default 10*b.
    pub hybrid_prefilter_size: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            methods: Method::ALL.iter().map(|m| m.token().to_string()).collect(),
            boundaries: vec![10, 30, 50],
            repetitions: 10,
            lambda: 0.2,
            folds: 10,
            master_seed: 42,
            workers: 0,
            normalize: true,
            prefilter_cap: None,
            hybrid_prefilter_size: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardConfig {
    pub optimize_metric: String,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            optimize_metric: "f_score".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub alpha: f64,
    pub epsilon: f64,
    pub alpha_decay: f64,
    pub epsilon_decay: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            alpha: 0.2,
            epsilon: 0.15,
            alpha_decay: 0.9995,
            epsilon_decay: 0.9995,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarlConfig {
    pub episodes: usize,
}

impl Default for MarlConfig {
    fn default() -> Self {
        MarlConfig { episodes: 5000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CleanConfig {
    pub episodes: usize,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig { episodes: 3000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub mutation_rate: Option<f64>,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 50,
            generations: 100,
            tournament_size: 3,
            crossover_prob: 0.7,
            mutation_prob: 1.0,
            mutation_rate: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizeConfig {
    pub bins: usize,
    pub scheme: BinningScheme,
}

impl Default for DiscretizeConfig {
    fn default() -> Self {
        DiscretizeConfig {
            bins: 3,
            scheme: BinningScheme::EqualWidth,
        }
    }
}

/// Fully validated, typed view of a RunConfig.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub methods: Vec<Method>,
    pub boundaries: Vec<usize>,
    pub repetitions: usize,
    pub lambda: f64,
    pub folds: usize,
    pub master_seed: u64,
    pub workers: usize,
    pub normalize: bool,
    pub prefilter_cap: Option<usize>,
    pub hybrid_prefilter_size: Option<usize>,
    pub knn_k: usize,
    pub optimize_metric: Metric,
    pub schedule: LearningSchedule,
    pub marl_episodes: usize,
    pub clean_episodes: usize,
    pub ga: GaParams,
    pub bins: usize,
    pub binning: BinningScheme,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    /// Read a config from a TOML file, a JSON file, or a manifest JSON
    /// (whose embedded config is extracted), keyed on the extension.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        if path.extension().is_some_and(|e| e == "json") {
            #[derive(Deserialize)]
            struct ManifestEnvelope {
                config: RunConfig,
            }
            if let Ok(envelope) = serde_json::from_str::<ManifestEnvelope>(&text) {
                return Ok(envelope.config);
            }
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    /// Stable hash of the canonical JSON form, for manifests.
    pub fn hash_hex(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serialises");
        format!("{:016x}", fnv1a64(canonical.as_bytes()))
    }

    /// Check every precondition that does not depend on the loaded dataset.
    pub fn validate(&self) -> Result<ResolvedConfig> {
        let exp = &self.experiment;
        if exp.methods.is_empty() {
            return Err(Error::config("experiment.methods", "must not be empty"));
        }
        let mut methods = Vec::with_capacity(exp.methods.len());
        for name in &exp.methods {
            let m: Method = name.parse().map_err(|_| {
                Error::config(
                    "experiment.methods",
                    format!(
                        "unknown method `{name}` (expected one of: {})",
                        Method::ALL
                            .iter()
                            .map(|m| m.token())
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                )
            })?;
            if methods.contains(&m) {
                return Err(Error::config(
                    "experiment.methods",
                    format!("duplicate method `{name}`"),
                ));
            }
            methods.push(m);
        }
        if exp.boundaries.is_empty() {
            return Err(Error::config("experiment.boundaries", "must not be empty"));
        }
        let mut seen = Vec::new();
        for &b in &exp.boundaries {
            if b == 0 {
                return Err(Error::config("experiment.boundaries", "b must be >= 1"));
            }
            if seen.contains(&b) {
                return Err(Error::config(
                    "experiment.boundaries",
                    format!("duplicate boundary {b}"),
                ));
            }
            seen.push(b);
        }
        if !(exp.lambda > 0.0 && exp.lambda < 1.0) {
            return Err(Error::config(
                "experiment.lambda",
                format!("must be in (0,1), got {}", exp.lambda),
            ));
        }
        if exp.folds < 2 {
            return Err(Error::config("experiment.folds", "must be >= 2"));
        }
        if exp.repetitions == 0 {
            return Err(Error::config("experiment.repetitions", "must be >= 1"));
        }
        if let Some(cap) = exp.prefilter_cap {
            if cap == 0 {
                return Err(Error::config("experiment.prefilter_cap", "must be >= 1"));
            }
        }
        if methods.iter().any(|m| m.has_ucfs_prefilter()) {
            if let Some(size) = exp.hybrid_prefilter_size {
                let max_b = *exp.boundaries.iter().max().unwrap();
                if size < max_b {
                    return Err(Error::config(
                        "experiment.hybrid_prefilter_size",
                        format!("must be >= every boundary (largest is {max_b}), got {size}"),
                    ));
                }
            }
        }

        KnnModel::new(self.knn.k).map_err(|e| Error::config("knn.k", e.to_string()))?;
        let optimize_metric: Metric = self
            .reward
            .optimize_metric
            .parse()
            .map_err(|e: Error| Error::config("reward.optimize_metric", e.to_string()))?;
        let schedule = LearningSchedule::new(
            self.schedule.alpha,
            self.schedule.epsilon,
            self.schedule.alpha_decay,
            self.schedule.epsilon_decay,
        )
        .map_err(|e| Error::config("schedule", e.to_string()))?;
        if self.marl.episodes == 0 {
            return Err(Error::config("marl.episodes", "must be >= 1"));
        }
        if self.clean.episodes == 0 {
            return Err(Error::config("clean.episodes", "must be >= 1"));
        }
        let ga = GaParams {
            population_size: self.ga.population_size,
            num_generations: self.ga.generations,
            tournament_size: self.ga.tournament_size,
            crossover_prob: self.ga.crossover_prob,
            mutation_prob: self.ga.mutation_prob,
            mutation_rate: self.ga.mutation_rate,
        };
        ga.validate().map_err(|e| Error::config("ga", e.to_string()))?;
        if self.discretize.bins < 2 {
            return Err(Error::config("discretize.bins", "must be >= 2"));
        }

        match &self.dataset {
            DatasetConfig::Csv { path, .. } => {
                if path.is_empty() {
                    return Err(Error::config("dataset.path", "must not be empty"));
                }
            }
            DatasetConfig::Synthetic {
                features,
                rows,
                informative,
                num_informative,
                noise,
                ..
            } => {
                if *features == 0 {
                    return Err(Error::config("dataset.features", "must be >= 1"));
                }
                if *rows < 4 {
                    return Err(Error::config("dataset.rows", "must be >= 4"));
                }
                if informative.is_some() && num_informative.is_some() {
                    return Err(Error::config(
                        "dataset.informative",
                        "set either informative or num_informative, not both",
                    ));
                }
                if let Some(list) = informative {
                    if list.iter().any(|&j| j >= *features) {
                        return Err(Error::config(
                            "dataset.informative",
                            "informative index out of range",
                        ));
                    }
                }
                if let Some(n) = num_informative {
                    if *n > *features {
                        return Err(Error::config(
                            "dataset.num_informative",
                            "exceeds feature count",
                        ));
                    }
                }
                if !noise.is_finite() || *noise < 0.0 {
                    return Err(Error::config("dataset.noise", "must be >= 0"));
                }
            }
        }

        Ok(ResolvedConfig {
            methods,
            boundaries: exp.boundaries.clone(),
            repetitions: exp.repetitions,
            lambda: exp.lambda,
            folds: exp.folds,
            master_seed: exp.master_seed,
            workers: exp.workers,
            normalize: exp.normalize,
            prefilter_cap: exp.prefilter_cap,
            hybrid_prefilter_size: exp.hybrid_prefilter_size,
            knn_k: self.knn.k,
            optimize_metric,
            schedule,
            marl_episodes: self.marl.episodes,
            clean_episodes: self.clean.episodes,
            ga,
            bins: self.discretize.bins,
            binning: self.discretize.scheme,
        })
    }
}
