use std::path::PathBuf;

use clap::Parser;

#[derive(Debug, Parser)]
#[command(name = "featsel-server", about = "HTTP job service running feature-selection experiments")]
struct Args {
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,

    /// Directory where job artifacts are written (one subdirectory per job).
    #[arg(long, default_value = "featsel-data")]
    data_dir: PathBuf,
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    tracing_subscriber::fmt().with_target(false).init();
    let args = Args::parse();
    std::fs::create_dir_all(&args.data_dir)?;

    let state = featsel_server::AppState::new(args.data_dir);
    let app = featsel_server::build_router(state);

    let listener = tokio::net::TcpListener::bind(&args.addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}
