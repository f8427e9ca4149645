//! File emission for a completed run: per-boundary results CSVs and
//! aggregate JSONs, learning-curve CSVs, the rank table, the full report,
//! and a manifest that pins the resolved config and seeds so any run can be
//! reproduced bit-identically.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::experiment::RunOutcome;
use crate::report::RankTable;

pub const MANIFEST_NAME: &str = "manifest.json";
pub const REPORT_NAME: &str = "report.json";
pub const RANK_TABLE_NAME: &str = "rank_table.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub config_hash: String,
    pub master_seed: u64,
    pub engine_version: String,
    pub artifacts: Vec<String>,
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(&path, bytes).map_err(|e| Error::Io { path, source: e })
}

fn results_csv(outcome: &RunOutcome, boundary: usize) -> String {
    let mut text = String::from("method,rep,subset_size,accuracy,precision,recall,f_score\n");
    let table = outcome
        .report
        .tables
        .iter()
        .find(|t| t.boundary == boundary)
        .expect("table exists for every boundary");
    for agg in &table.rows {
        for row in outcome.report.rows.iter().filter(|r| {
            r.method == agg.method && (r.boundary == Some(boundary) || r.boundary.is_none())
        }) {
            text.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.method,
                row.rep,
                row.subset_size,
                row.metrics.accuracy,
                row.metrics.precision,
                row.metrics.recall,
                row.metrics.f_score
            ));
        }
    }
    text
}

fn rank_csv(rank: &RankTable) -> String {
    let mut text =
        String::from("method,features_score,features_rank,performance_score,performance_rank\n");
    for row in &rank.rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            row.method,
            row.features_score,
            row.features_rank,
            row.performance_score,
            row.performance_rank
        ));
    }
    text
}

/// Write every artifact of a run into `out_dir` and return the manifest
/// (which is itself written last, as `manifest.json`).
pub fn write_run(outcome: &RunOutcome, config: &RunConfig, out_dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let mut artifacts = Vec::new();

    let report_json = serde_json::to_string_pretty(&outcome.report)?;
    write_file(out_dir, REPORT_NAME, report_json.as_bytes())?;
    artifacts.push(REPORT_NAME.to_string());

    for table in &outcome.report.tables {
        let name = format!("results_b{}.csv", table.boundary);
        write_file(out_dir, &name, results_csv(outcome, table.boundary).as_bytes())?;
        artifacts.push(name);

        let name = format!("aggregate_b{}.json", table.boundary);
        write_file(out_dir, &name, serde_json::to_string_pretty(table)?.as_bytes())?;
        artifacts.push(name);
    }

    if let Some(rank) = &outcome.report.rank {
        write_file(out_dir, RANK_TABLE_NAME, rank_csv(rank).as_bytes())?;
        artifacts.push(RANK_TABLE_NAME.to_string());
    }

    for named in &outcome.curves {
        let mut buf = Vec::new();
        named.curve.write_csv(&mut buf)?;
        write_file(out_dir, &named.name, &buf)?;
        artifacts.push(named.name.clone());
    }

    artifacts.push(MANIFEST_NAME.to_string());
    let manifest = Manifest {
        config: config.clone(),
        config_hash: config.hash_hex(),
        master_seed: config.experiment.master_seed,
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        artifacts,
    };
    write_file(
        out_dir,
        MANIFEST_NAME,
        serde_json::to_string_pretty(&manifest)?.as_bytes(),
    )?;
    Ok(manifest)
}

/// Convenience: run the experiment described by a config and write all
/// artifacts. Returns the manifest.
pub fn run_to_dir(
    config: &RunConfig,
    out_dir: &Path,
    progress: Option<crate::experiment::ProgressFn>,
) -> Result<Manifest> {
    let outcome = crate::experiment::run_experiment(config, progress)?;
    write_run(&outcome, config, out_dir)
}
