use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use coherence_service::{bodies, query::ProjectionQuery, router};
use emotion_coherence::ingest::{load_bundle_with, BundleManifest, IngestOptions};
use emotion_coherence::store::ingest_into;
use emotion_coherence::{CorpusStore, IngestError};

#[derive(Parser)]
#[command(name = "coherence", version, about = "Emotion coherence corpus tools and HTTP service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Export {
    Summary,
    Sankey,
    Projection,
    Words,
}

#[derive(Subcommand)]
enum Command {
    /// Validate bundles and copy them into a store.
    Ingest {
        #[arg(required = true)]
        bundles: Vec<PathBuf>,
        #[arg(long)]
        store: PathBuf,
    },
    /// Check one bundle and report every violation.
    Validate { bundle: PathBuf },
    /// Serve the HTTP API over a store.
    Serve {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
    /// Write a derived model with the same body the HTTP API returns.
    Export {
        id: String,
        #[arg(long)]
        store: PathBuf,
        #[arg(long, value_enum)]
        what: Export,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        perplexity: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Ingest { bundles, store } => {
            let ingested = ingest_into(&store, &bundles).map_err(|e| e.to_string())?;
            for v in &ingested {
                println!("{}\t{} segments\t{} frames\t{}", v.id, v.segments, v.frames, &v.digest[..16]);
            }
            Ok(())
        }
        Command::Validate { bundle } => {
            let manifest = BundleManifest::from_dir(&bundle).map_err(|e| e.to_string())?;
            match load_bundle_with(&manifest, &IngestOptions::default()) {
                Ok(b) => {
                    println!("ok: {} ({} segments, {} frames)", b.record.meta.id, b.record.segments.len(), b.record.frames.len());
                    Ok(())
                }
                Err(IngestError::Invalid(report)) => Err(format!("{} violation(s):\n{report}", report.len())),
                Err(e) => Err(e.to_string()),
            }
        }
        Command::Serve { store, port, host } => {
            let store = CorpusStore::open(&store).map_err(|e| e.to_string())?;
            let app = router(Arc::new(store));
            let addr = SocketAddr::new(host, port);
            let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| format!("{addr}: {e}"))?;
                eprintln!("listening on http://{}", listener.local_addr().map_err(|e| e.to_string())?);
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
                    .map_err(|e| e.to_string())
            })
        }
        Command::Export { id, store, what, out, seed, perplexity } => {
            let store = CorpusStore::open(&store).map_err(|e| e.to_string())?;
            let body = match what {
                Export::Summary => serde_json::to_vec(&bodies::video_detail(&store, &id).map_err(|e| e.message)?),
                Export::Sankey => serde_json::to_vec(&*bodies::sankey(&store, &id).map_err(|e| e.message)?),
                Export::Projection => {
                    let q = ProjectionQuery { seed, perplexity, ..ProjectionQuery::default() };
                    serde_json::to_vec(&*bodies::projection(&store, &id, &q).map_err(|e| e.message)?)
                }
                Export::Words => serde_json::to_vec(&bodies::word_table(&store, &id, None, None).map_err(|e| e.message)?),
            }
            .map_err(|e| e.to_string())?;
            match out {
                Some(path) => std::fs::write(&path, body).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(&body).map_err(|e| e.to_string())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
