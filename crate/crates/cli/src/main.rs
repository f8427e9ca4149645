//! `featsel` — run feature-selection experiments from a declarative config,
//! generate synthetic planted-feature datasets, and re-run the ranking
//! analysis over existing results. Runs in-process by default; with
//! `--server` every command becomes a client of a featsel-server instance.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use featsel_client::types::GenerateRequest;
use featsel_client::Client;
use featsel_core::dataset::{make_synthetic, write_csv, SyntheticSidecar};
use featsel_core::report::score_rank;
use featsel_core::{AggregateTable, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "featsel", version, about)]
struct Cli {
    /// Base URL of a featsel-server; when set, work is submitted there
    /// instead of running in this process.
    #[arg(long, global = true)]
    server: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a config file and write all artifacts.
    Run(RunArgs),
    /// Generate a synthetic planted-feature dataset CSV plus its sidecar.
    Generate(GenerateArgs),
    /// Re-run the score-based ranking analysis over existing aggregates.
    Rank(RankArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Config file (TOML, JSON, or a manifest.json from a previous run).
    #[arg(long)]
    config: PathBuf,

    /// Output directory for artifacts.
    #[arg(long, default_value = "featsel-out")]
    out: PathBuf,

    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the config's worker count (0 = auto).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    features: usize,

    #[arg(long)]
    rows: usize,

    /// Make features 0..N informative.
    #[arg(long, conflicts_with = "informative_indices")]
    num_informative: Option<usize>,

    /// Comma-separated informative feature indices.
    #[arg(long, value_delimiter = ',')]
    informative_indices: Option<Vec<usize>>,

    #[arg(long, default_value_t = 0.5)]
    noise: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output CSV path; the ground-truth sidecar lands next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RankArgs {
    /// Directory holding aggregate_b*.json files from a previous run.
    #[arg(long)]
    results: PathBuf,

    /// Output CSV path (defaults to rank_table.csv inside --results).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(args, cli.server.as_deref()),
        Command::Generate(args) => cmd_generate(args, cli.server.as_deref()),
        Command::Rank(args) => cmd_rank(args),
    }
}

fn cmd_run(args: RunArgs, server: Option<&str>) -> anyhow::Result<()> {
    let mut config = RunConfig::from_path(&args.config)
        .with_context(|| format!("failed to load config {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        config.experiment.master_seed = seed;
    }
    if let Some(workers) = args.workers {
        config.experiment.workers = workers;
    }
    config.validate().context("invalid config")?;

    match server {
        None => {
            let progress: featsel_core::ProgressFn = Arc::new(|done, total| {
                eprintln!("completed {done}/{total} jobs");
            });
            let manifest = featsel_core::artifacts::run_to_dir(&config, &args.out, Some(progress))
                .context("experiment failed")?;
            println!(
                "wrote {} artifacts to {} (config hash {})",
                manifest.artifacts.len(),
                args.out.display(),
                manifest.config_hash
            );
        }
        Some(url) => {
            let client = Client::new(url);
            let job = client.submit_experiment(&config)?;
            eprintln!("submitted job {job} to {url}");
            let mut last = 0;
            client.wait(job, Duration::from_millis(500), |status| {
                if status.done_units != last {
                    last = status.done_units;
                    eprintln!("completed {}/{} jobs", status.done_units, status.total_units);
                }
            })?;
            let artifacts = client.artifacts(job)?;
            for name in &artifacts {
                let bytes = client.fetch_artifact(job, name)?;
                let path = args.out.join(name);
                if let Some(parent) = path.parent() {
                    std::fs::create_dir_all(parent)?;
                }
                std::fs::write(&path, bytes)?;
            }
            println!(
                "downloaded {} artifacts from job {job} to {}",
                artifacts.len(),
                args.out.display()
            );
        }
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs, server: Option<&str>) -> anyhow::Result<()> {
    let informative: Vec<usize> = match (&args.informative_indices, args.num_informative) {
        (Some(list), _) => list.clone(),
        (None, Some(n)) => (0..n).collect(),
        (None, None) => Vec::new(),
    };
    let sidecar_path = sidecar_path_for(&args.out);

    let sidecar = match server {
        None => {
            let data = make_synthetic(args.features, args.rows, &informative, args.noise, args.seed)
                .context("invalid synthetic spec")?;
            write_csv(&data, &args.out)
                .with_context(|| format!("cannot write {}", args.out.display()))?;
            SyntheticSidecar::for_dataset(&data).expect("synthetic provenance")
        }
        Some(url) => {
            let client = Client::new(url);
            let res = client.generate(&GenerateRequest {
                features: args.features,
                rows: args.rows,
                informative: args.informative_indices.clone(),
                num_informative: args.num_informative,
                noise: args.noise,
                seed: args.seed,
            })?;
            std::fs::write(&args.out, res.csv)
                .with_context(|| format!("cannot write {}", args.out.display()))?;
            res.sidecar
        }
    };
    std::fs::write(&sidecar_path, serde_json::to_string_pretty(&sidecar)?)
        .with_context(|| format!("cannot write {}", sidecar_path.display()))?;
    println!(
        "wrote {} and {}",
        args.out.display(),
        sidecar_path.display()
    );
    Ok(())
}

fn sidecar_path_for(csv: &Path) -> PathBuf {
    csv.with_extension("sidecar.json")
}

fn cmd_rank(args: RankArgs) -> anyhow::Result<()> {
    let mut tables: Vec<(usize, AggregateTable)> = Vec::new();
    for entry in std::fs::read_dir(&args.results)
        .with_context(|| format!("cannot read {}", args.results.display()))?
    {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("aggregate_b") && name.ends_with(".json") {
            let text = std::fs::read_to_string(&path)?;
            let table: AggregateTable = serde_json::from_str(&text)
                .with_context(|| format!("malformed aggregate table {}", path.display()))?;
            tables.push((table.boundary, table));
        }
    }
    if tables.is_empty() {
        bail!(
            "no aggregate_b*.json files found in {}",
            args.results.display()
        );
    }
    tables.sort_by_key(|(b, _)| *b);
    let tables: Vec<AggregateTable> = tables.into_iter().map(|(_, t)| t).collect();
    let rank = score_rank(&tables).context("ranking failed")?;

    let out = args
        .out
        .unwrap_or_else(|| args.results.join("rank_table.csv"));
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
    std::fs::write(&out, text).with_context(|| format!("cannot write {}", out.display()))?;
    println!("wrote {}", out.display());
    Ok(())
}
