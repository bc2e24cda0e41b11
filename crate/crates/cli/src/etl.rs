use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use edw_core::etl::{run_with_config, status, EtlConfig};

use crate::{open_registry, CliError};

#[derive(Debug, Parser)]
#[command(name = "etl", about = "Load the platform journal into the event warehouse")]
pub struct EtlCli {
    #[command(subcommand)]
    pub command: EtlCommand,
}

#[derive(Debug, Subcommand)]
pub enum EtlCommand {
    /// Incremental run from the stored watermark.
    Run {
        #[arg(long, default_value = "etl.conf")]
        config: PathBuf,
    },
    /// Watermark, pending events and record counts.
    Status {
        #[arg(long, default_value = "etl.conf")]
        config: PathBuf,
    },
    /// Full re-run from watermark 0 into a fresh warehouse.
    Rebuild {
        #[arg(long, default_value = "etl.conf")]
        config: PathBuf,
    },
}

fn load_config(path: &PathBuf) -> Result<EtlConfig, CliError> {
    Ok(EtlConfig::load(path)?)
}

pub fn execute(cli: EtlCli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        EtlCommand::Status { config } => {
            let config = load_config(&config)?;
            serde_json::to_writer_pretty(&mut *out, &status(&config)?)?;
        }
        EtlCommand::Run { config } => run(&config, false, out)?,
        EtlCommand::Rebuild { config } => run(&config, true, out)?,
    }
    writeln!(out)?;
    Ok(())
}

fn run(path: &PathBuf, fresh: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let config = load_config(path)?;
    let registry = config.registry_endpoint.as_ref().map(open_registry).transpose()?;
    let stats = run_with_config(&config, registry.as_deref(), fresh)?;
    log::info!(
        "loaded {} journal records and {} registry records up to event {}",
        stats.loaded,
        stats.registry_events,
        stats.watermark
    );
    serde_json::to_writer_pretty(&mut *out, &stats)?;
    Ok(())
}
