//! Command implementations behind the `etl`, `warehouse`, `fixtures`,
//! `mock-registry` and `platform-api` binaries. Each command writes its
//! report to the given writer so it can be driven from tests.

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use edw_core::etl::{EtlError, RegistryEndpoint};
use edw_core::fixtures::FixtureError;
use edw_core::platform::PlatformError;
use edw_core::registry::{FixtureRegistry, RegistryError, RegistrySource};
use edw_core::warehouse::WarehouseError;
use edw_http::HttpRegistryClient;

pub mod etl;
pub mod fixtures;
pub mod serve;
pub mod warehouse;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Etl(#[from] EtlError),
    #[error(transparent)]
    Warehouse(#[from] WarehouseError),
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Platform(#[from] PlatformError),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{0}")]
    Usage(String),
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

pub(crate) fn read_file(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::File {
        path: path.clone(),
        source,
    })
}

/// A registry source for a configured endpoint. The HTTP client is blocking,
/// so build it outside any async runtime.
pub fn open_registry(endpoint: &RegistryEndpoint) -> Result<Arc<dyn RegistrySource>, CliError> {
    Ok(match endpoint {
        RegistryEndpoint::Http(url) => Arc::new(HttpRegistryClient::new(url)?),
        RegistryEndpoint::Fixture(path) => Arc::new(FixtureRegistry::from_file(path).map_err(|source| CliError::File {
            path: path.clone(),
            source,
        })?),
    })
}

pub fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
}

/// Prints the error and maps the outcome to a process exit code.
pub fn finish(result: Result<(), CliError>) -> ExitCode {
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
