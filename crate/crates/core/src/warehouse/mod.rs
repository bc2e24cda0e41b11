//! The single-table time-series warehouse: record schema, durable store,
//! aggregation, success scoring and export.

mod analytics;
mod export;
mod record;
mod store;
mod table;

use std::io;
use std::path::PathBuf;

use crate::domain::CaseId;

pub use analytics::{
    aggregate_category_action, aggregate_monthly, events_per_case, join_financials, rank_cases, success_score,
    success_score_through, Breakdown, CaseStats, CategoryActionTable, FinancialRow, GroupBy, GroupMap, MonthlyTable,
    SuccessScore, Weights,
};
pub use export::{export, read_record_lines, write_aggregate_table, write_record_lines, ExportFormat};
pub use record::{columns, specific_columns, RecordKey, RecordSource, WarehouseRecord, COMMON_COLUMNS, SPECIFIC_COLUMNS};
pub use store::{read_warehouse, Change, Checkpoint, CommitSummary, WarehouseStore};
pub use table::{UpsertOutcome, Warehouse};

#[derive(Debug, thiserror::Error)]
pub enum WarehouseError {
    #[error("warehouse i/o: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt warehouse data at line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("warehouse at {0} is locked by another run")]
    Locked(PathBuf),
    #[error("warehouse holds no journal events")]
    EmptyWarehouse,
    #[error("case {0} has no records in the warehouse")]
    UnknownCase(CaseId),
    #[error("case {0} has no registry financials")]
    NoFinancials(CaseId),
    #[error("invalid group map: {0}")]
    InvalidGroupMap(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("cannot write export to {path}: {source}")]
    DestinationUnwritable { path: PathBuf, source: io::Error },
}
