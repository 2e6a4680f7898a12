use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use clap::{Parser, Subcommand};
use humboldt_core::discovery::ServiceError;
use humboldt_core::provider::{ProviderRegistry, RegistryOptions};
use humboldt_core::spec::{parse_spec, validate_spec};
use humboldt_server::{load_service, router};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "humboldt", version, about = "Metadata-driven data discovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a specification document and report every violation.
    Validate { spec: PathBuf },
    /// Serve the REST API.
    Serve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        catalog: PathBuf,
        /// Config state file; created on first write.
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, env = "HUMBOLDT_PORT", default_value_t = 8080)]
        port: u16,
        /// Base URL that relative provider endpoints resolve against.
        #[arg(long)]
        provider_base: Option<url::Url>,
        #[arg(long, env = "HUMBOLDT_PROVIDER_TIMEOUT_MS", default_value_t = 5000)]
        timeout_ms: u64,
    },
    /// Run a query against a catalog and print ranked artifact ids.
    Query {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        provider_base: Option<url::Url>,
        #[arg(long, env = "HUMBOLDT_PROVIDER_TIMEOUT_MS", default_value_t = 5000)]
        timeout_ms: u64,
        query: String,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { spec } => validate(spec),
        Command::Serve { spec, catalog, state, port, provider_base, timeout_ms } => {
            runtime().and_then(|rt| rt.block_on(serve(spec, catalog, state, port, provider_base, timeout_ms)))
        }
        Command::Query { spec, catalog, provider_base, timeout_ms, query: text } => {
            runtime().and_then(|rt| rt.block_on(query(spec, catalog, provider_base, timeout_ms, text)))
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn runtime() -> anyhow::Result<tokio::runtime::Runtime> {
    Ok(tokio::runtime::Builder::new_multi_thread().enable_all().build()?)
}

fn validate(path: PathBuf) -> anyhow::Result<ExitCode> {
    let bytes = std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
    let doc = match parse_spec(&bytes) {
        Ok(doc) => doc,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            return Ok(ExitCode::FAILURE);
        }
    };
    let mut problems: Vec<String> = validate_spec(&doc).iter().map(|v| v.to_string()).collect();
    if let Err(e) = ProviderRegistry::new(&doc, RegistryOptions::default()) {
        problems.push(e.to_string());
    }
    for warning in humboldt_core::spec::resolve_custom_content(&doc).warnings {
        println!("warning: {}", serde_json::to_string(&warning)?);
    }
    if problems.is_empty() {
        println!("{}: ok ({} providers)", path.display(), doc.providers.len());
        Ok(ExitCode::SUCCESS)
    } else {
        for p in &problems {
            println!("{}: {p}", path.display());
        }
        Ok(ExitCode::FAILURE)
    }
}

async fn serve(
    spec: PathBuf,
    catalog: PathBuf,
    state: Option<PathBuf>,
    port: u16,
    provider_base: Option<url::Url>,
    timeout_ms: u64,
) -> anyhow::Result<ExitCode> {
    let service = load_service(&spec, &catalog, state.as_deref(), provider_base, Duration::from_millis(timeout_ms))?;
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await.with_context(|| format!("binding port {port}"))?;
    tracing::info!(addr = %listener.local_addr()?, "serving");
    axum::serve(listener, router(Arc::new(service)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(ExitCode::SUCCESS)
}

async fn query(
    spec: PathBuf,
    catalog: PathBuf,
    provider_base: Option<url::Url>,
    timeout_ms: u64,
    text: String,
) -> anyhow::Result<ExitCode> {
    let service = load_service(&spec, &catalog, None, provider_base, Duration::from_millis(timeout_ms))?;
    match service.search(&text, "cli").await {
        Ok(ids) => {
            for id in ids {
                println!("{id}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(ServiceError::Query(e)) => {
            let position = e.position();
            eprintln!("error: {e}");
            eprintln!("  {text}");
            let column = text.get(..position).map_or(text.chars().count(), |s| s.chars().count());
            eprintln!("  {}^", " ".repeat(column));
            eprintln!("position: {position}");
            Ok(ExitCode::from(2))
        }
        Err(e) => Err(e.into()),
    }
}
