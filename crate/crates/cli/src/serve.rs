use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::Router;
use clap::{Parser, Subcommand};

use edw_core::etl::RegistryEndpoint;
use edw_core::journal::SystemClock;
use edw_core::platform::Platform;
use edw_core::registry::{FixtureRegistry, RegistrySource};
use edw_http::{platform_router, registry_router};

use crate::{open_registry, CliError};

#[derive(Debug, Parser)]
#[command(name = "mock-registry", about = "Serve a registry fixture file over HTTP")]
pub struct MockRegistryCli {
    #[command(subcommand)]
    pub command: MockRegistryCommand,
}

#[derive(Debug, Subcommand)]
pub enum MockRegistryCommand {
    Serve {
        #[arg(long)]
        fixtures: PathBuf,
        /// 0 picks a free port; the bound address is printed.
        #[arg(long)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

#[derive(Debug, Parser)]
#[command(name = "platform-api", about = "Serve the platform API over a journal file")]
pub struct PlatformApiCli {
    /// Journal file; the case catalog is kept beside it.
    #[arg(long)]
    pub journal: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// Registry for company-link checks: an http(s) URL or a fixture file.
    #[arg(long)]
    pub registry: Option<String>,
}

fn serve_forever(addr: SocketAddr, router: Router, out: &mut dyn Write) -> Result<(), CliError> {
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        let bound = listener.local_addr()?;
        log::info!("listening on http://{bound}");
        writeln!(out, "listening on http://{bound}")?;
        out.flush()?;
        edw_http::serve(listener, router).await
    })?;
    Ok(())
}

pub fn mock_registry(cli: MockRegistryCli, out: &mut dyn Write) -> Result<(), CliError> {
    let MockRegistryCommand::Serve { fixtures, port, host } = cli.command;
    let source = FixtureRegistry::from_file(&fixtures).map_err(|source| CliError::File {
        path: fixtures.clone(),
        source,
    })?;
    log::info!("serving {} companies from {}", source.documents().count(), fixtures.display());
    let source: Arc<dyn RegistrySource> = Arc::new(source);
    serve_forever(SocketAddr::new(host, port), registry_router(source), out)
}

pub fn platform_api(cli: PlatformApiCli, out: &mut dyn Write) -> Result<(), CliError> {
    let registry = match &cli.registry {
        Some(raw) => Some(open_registry(&RegistryEndpoint::parse(raw, Path::new(".")))?),
        None => None,
    };
    let platform = Platform::open(&cli.journal, Arc::new(SystemClock), registry)?;
    log::info!("journal {} holds {} events", cli.journal.display(), platform.journal().len());
    serve_forever(SocketAddr::new(cli.host, cli.port), platform_router(Arc::new(platform)), out)
}
