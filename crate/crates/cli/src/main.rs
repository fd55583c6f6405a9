use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use fedrts_client::{Client, CompareRequest, ConfigSource, RunRequest};

/// Federated dynamic sparse training simulator.
///
/// `run` and `compare` talk to a service at `--server`; without it they start
/// a private in-process service on a loopback port.
#[derive(Debug, Parser)]
#[command(name = "fedrts", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
    /// Run one experiment and write its metrics CSV.
    Run {
        config: PathBuf,
        /// Overrides the config's `seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Output path; defaults to the config's `out`, then `metrics.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        server: Option<String>,
    },
    /// Run several configs over their seed lists and print a summary table.
    Compare {
        #[arg(required = true, num_args = 2..)]
        configs: Vec<PathBuf>,
        /// Overrides every config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the table to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        server: Option<String>,
    },
}

fn read_source(path: &Path) -> Result<ConfigSource> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let dir = std::path::absolute(path)?.parent().map(|p| p.display().to_string());
    Ok(ConfigSource { text, base_dir: dir })
}

/// Writes through a temporary file in the target directory so the final
/// path only ever holds a complete file.
fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write to {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

async fn connect(server: Option<String>) -> Result<Client> {
    match server {
        Some(url) => Ok(Client::new(url)),
        None => {
            let (addr, _handle) = fedrts_server::spawn(SocketAddr::from(([127, 0, 0, 1], 0)))
                .await
                .context("cannot start the in-process service")?;
            Ok(Client::new(format!("http://{addr}")))
        }
    }
}

async fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Serve { addr } => {
            let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("cannot bind {addr}"))?;
            eprintln!("listening on {}", listener.local_addr()?);
            fedrts_server::serve(listener).await?;
        }
        Command::Run { config, seed, out, server } => {
            let source = read_source(&config)?;
            let client = connect(server).await?;
            let response = client.run(&RunRequest { config: source, seed }).await?;
            let path = out.or(response.out.map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("metrics.csv"));
            write_atomically(&path, &response.csv)?;
            println!("{}", response.summary);
            eprintln!("wrote {} rows to {}", response.rows, path.display());
        }
        Command::Compare { configs, seed, out, server } => {
            let sources = configs.iter().map(|p| read_source(p)).collect::<Result<Vec<_>>>()?;
            let client = connect(server).await?;
            let response = client.compare(&CompareRequest { configs: sources, seed }).await?;
            print!("{}", response.table);
            if let Some(path) = out {
                write_atomically(&path, &response.table)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if matches!(cli.command, Command::Serve { .. }) {
        tracing_subscriber::fmt()
            .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
            .with_writer(std::io::stderr)
            .init();
    }
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    match runtime.block_on(execute(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
