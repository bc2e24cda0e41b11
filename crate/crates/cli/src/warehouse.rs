use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use edw_core::etl::EtlConfig;
use edw_core::warehouse::{
    aggregate_monthly, events_per_case, export, join_financials, rank_cases, read_warehouse, success_score,
    write_aggregate_table, ExportFormat, GroupBy, GroupMap, Warehouse, Weights,
};
use edw_core::CaseId;

use crate::{read_file, CliError};

#[derive(Debug, Parser)]
#[command(name = "warehouse", about = "Reports, exports and success scores over the event warehouse")]
pub struct WarehouseCli {
    /// Warehouse directory. Defaults to the one named by --config.
    #[arg(long, global = true)]
    pub warehouse: Option<PathBuf>,
    /// ETL config whose warehouse_path to use.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: WarehouseCommand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportBy {
    /// Category by action counts with totals, as CSV.
    CategoryAction,
    /// Counts per calendar month, as CSV.
    Month,
    /// Events per case with mean, min and max, as JSON.
    Case,
}

#[derive(Debug, Subcommand)]
pub enum WarehouseCommand {
    Report {
        #[arg(long, value_enum, default_value = "category-action")]
        by: ReportBy,
        /// Breakdown of the monthly report: action or category.
        #[arg(long, default_value = "action")]
        group: GroupBy,
    },
    Export {
        /// record-lines or aggregate-table.
        #[arg(long)]
        format: ExportFormat,
        #[arg(long)]
        out: PathBuf,
    },
    /// Success score of one case, or the ranking of all cases without --case.
    Score {
        #[arg(long)]
        case: Option<u64>,
        #[arg(long)]
        group_map: Option<PathBuf>,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Registry financials per year next to the case's cumulative score.
    JoinFinancials {
        #[arg(long)]
        case: u64,
        #[arg(long)]
        group_map: Option<PathBuf>,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
}

fn warehouse_dir(cli: &WarehouseCli) -> Result<PathBuf, CliError> {
    match (&cli.warehouse, &cli.config) {
        (Some(dir), _) => Ok(dir.clone()),
        (None, Some(config)) => Ok(EtlConfig::load(config)?.warehouse_path),
        (None, None) => Err(CliError::Usage("pass --warehouse <dir> or --config <file>".into())),
    }
}

fn scoring(group_map: Option<&PathBuf>, weights: Option<&PathBuf>) -> Result<(GroupMap, Weights), CliError> {
    let groups = match group_map {
        Some(path) => GroupMap::parse(&read_file(path)?)?,
        None => GroupMap::default(),
    };
    let weights = match weights {
        Some(path) => Weights::parse(&read_file(path)?)?,
        None => Weights::default(),
    };
    Ok((groups, weights))
}

fn monthly_csv(warehouse: &Warehouse, group: GroupBy, out: &mut dyn Write) -> Result<(), CliError> {
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["month", "group", "count"]).map_err(std::io::Error::from)?;
    for (month, bucket) in aggregate_monthly(warehouse, group) {
        for (key, count) in bucket {
            csv.write_record([month.to_string(), key.to_string(), count.to_string()])
                .map_err(std::io::Error::from)?;
        }
    }
    csv.flush()?;
    Ok(())
}

pub fn execute(cli: WarehouseCli, out: &mut dyn Write) -> Result<(), CliError> {
    let (warehouse, _) = read_warehouse(warehouse_dir(&cli)?)?;
    match cli.command {
        WarehouseCommand::Report { by: ReportBy::CategoryAction, .. } => write_aggregate_table(&warehouse, out)?,
        WarehouseCommand::Report { by: ReportBy::Month, group } => monthly_csv(&warehouse, group, out)?,
        WarehouseCommand::Report { by: ReportBy::Case, .. } => {
            let stats = events_per_case(&warehouse)?;
            let body = serde_json::json!({
                "cases": stats.per_case.len(),
                "events": stats.total(),
                "mean": stats.mean,
                "min": stats.min,
                "max": stats.max,
            });
            serde_json::to_writer_pretty(&mut *out, &body)?;
            writeln!(out)?;
        }
        WarehouseCommand::Export { format, out: path } => {
            export(&warehouse, format, &path)?;
            writeln!(out, "wrote {} records to {}", warehouse.len(), path.display())?;
        }
        WarehouseCommand::Score { case, group_map, weights } => {
            let (groups, weights) = scoring(group_map.as_ref(), weights.as_ref())?;
            match case {
                Some(case) => serde_json::to_writer_pretty(&mut *out, &success_score(&warehouse, CaseId(case), &groups, &weights)?)?,
                None => serde_json::to_writer_pretty(&mut *out, &rank_cases(&warehouse, &groups, &weights))?,
            }
            writeln!(out)?;
        }
        WarehouseCommand::JoinFinancials { case, group_map, weights } => {
            let (groups, weights) = scoring(group_map.as_ref(), weights.as_ref())?;
            let rows = join_financials(&warehouse, CaseId(case), &groups, &weights)?;
            serde_json::to_writer_pretty(&mut *out, &rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
