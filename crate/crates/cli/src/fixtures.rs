use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use edw_core::fixtures::{generate_journal, generate_registry_fixture, FixtureSpec};
use edw_core::platform::catalog_path_for;
use edw_core::registry::write_fixture_file;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "fixtures", about = "Deterministic journal and registry fixtures")]
pub struct FixturesCli {
    #[command(subcommand)]
    pub command: FixturesCommand,
}

#[derive(Debug, Subcommand)]
pub enum FixturesCommand {
    /// Writes a journal and its case catalog.
    Journal {
        /// A TOML spec file, or `table5` for the built-in preset.
        #[arg(long)]
        spec: String,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Writes a registry fixture file.
    Registry {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        companies: usize,
        #[arg(long)]
        out: PathBuf,
        /// Reporting years as FIRST..=LAST or FIRST-LAST.
        #[arg(long, value_parser = parse_years)]
        years: Option<RangeInclusive<i32>>,
    },
}

fn parse_years(raw: &str) -> Result<RangeInclusive<i32>, String> {
    let (a, b) = raw
        .split_once("..=")
        .or_else(|| raw.split_once('-'))
        .ok_or_else(|| format!("expected FIRST-LAST, got {raw:?}"))?;
    let first: i32 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let last: i32 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if first > last {
        return Err(format!("{first} is after {last}"));
    }
    Ok(first..=last)
}

pub fn execute(cli: FixturesCli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        FixturesCommand::Journal { spec, out: path, seed } => {
            let mut spec = FixtureSpec::load(&spec)?;
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let generated = generate_journal(&spec)?;
            generated.write(&path)?;
            writeln!(
                out,
                "wrote {} events over {} cases to {} (catalog {})",
                generated.journal.len(),
                generated.catalog.cases.len(),
                path.display(),
                catalog_path_for(&path).display()
            )?;
        }
        FixturesCommand::Registry { seed, companies, out: path, years } => {
            let docs = generate_registry_fixture(seed, companies, years);
            write_fixture_file(&path, &docs)?;
            writeln!(out, "wrote {} companies to {}", docs.len(), path.display())?;
        }
    }
    Ok(())
}
