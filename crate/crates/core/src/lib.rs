//! Feature-selection engine built around one idea: treat every feature as a
//! stateless learning agent that decides whether its feature joins the
//! subset. Agents train either on the shared global reward (MARL) or on
//! private counterfactual rewards (CLEAN) that isolate each agent's own
//! contribution. Correlation and mutual-information filters, a GA wrapper,
//! and filter+wrapper hybrids round out the compared methods; everything is
//! scored by a kNN classifier under stratified k-fold cross-validation with
//! a size-penalised reward.

pub mod agents;
pub mod artifacts;
pub mod classifier;
pub mod config;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod filters;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod subset;
pub mod wrappers;

pub use config::{DatasetConfig, ResolvedConfig, RunConfig};
pub use dataset::{Dataset, FoldPartition, SplitSpec};
pub use error::{Error, Result};
pub use experiment::{run_experiment, Method, MethodSpec, ProgressFn, RunOutcome};
pub use metrics::PerformanceReport;
pub use report::{AggregateTable, ExperimentReport, RankTable, ReportRow};
pub use subset::FeatureSubset;
