use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::domain::ActionType;

use super::analytics::aggregate_category_action;
use super::record::{columns, WarehouseRecord};
use super::table::Warehouse;
use super::WarehouseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    /// A header line listing the columns, then one JSON object per record.
    RecordLines,
    /// Category × action counts as CSV with a closing totals row.
    AggregateTable,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "record-lines" => Ok(ExportFormat::RecordLines),
            "aggregate-table" => Ok(ExportFormat::AggregateTable),
            other => Err(format!("unknown export format {other:?}")),
        }
    }
}

pub fn write_record_lines(warehouse: &Warehouse, mut out: impl Write) -> io::Result<()> {
    serde_json::to_writer(&mut out, &columns())?;
    out.write_all(b"\n")?;
    for record in warehouse.records() {
        serde_json::to_writer(&mut out, &record.to_row())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Rebuilds a warehouse from a record-lines export.
pub fn read_record_lines(input: impl BufRead) -> Result<Warehouse, WarehouseError> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?.ok_or(WarehouseError::Corrupt {
        line: 1,
        reason: "missing header".into(),
    })?;
    let header: Vec<String> = serde_json::from_str(&header).map_err(|e| WarehouseError::Corrupt {
        line: 1,
        reason: e.to_string(),
    })?;
    if header != columns() {
        return Err(WarehouseError::Corrupt {
            line: 1,
            reason: "header does not match the record columns".into(),
        });
    }
    let mut warehouse = Warehouse::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let corrupt = |reason: String| WarehouseError::Corrupt { line: idx + 2, reason };
        let row: Map<String, Value> = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
        warehouse.upsert(WarehouseRecord::from_row(row).map_err(corrupt)?);
    }
    Ok(warehouse)
}

pub fn write_aggregate_table(warehouse: &Warehouse, out: impl Write) -> io::Result<()> {
    let table = aggregate_category_action(warehouse);
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["category_id", "category", "create", "update", "delete", "move", "total"])?;
    if table.total() > 0 {
        for (category, row) in table.rows() {
            let total: u64 = row.iter().sum();
            csv.write_record([
                category.id().to_string(),
                category.name().to_string(),
                row[0].to_string(),
                row[1].to_string(),
                row[2].to_string(),
                row[3].to_string(),
                total.to_string(),
            ])?;
        }
        let mut totals = vec![String::new(), "Total".to_string()];
        totals.extend(ActionType::ALL.iter().map(|a| table.column_total(*a).to_string()));
        totals.push(table.total().to_string());
        csv.write_record(&totals)?;
    }
    csv.flush()
}

pub fn export(warehouse: &Warehouse, format: ExportFormat, path: impl AsRef<Path>) -> Result<(), WarehouseError> {
    let path = path.as_ref();
    let unwritable = |source: io::Error| WarehouseError::DestinationUnwritable {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(unwritable)?;
    let writer = BufWriter::new(file);
    match format {
        ExportFormat::RecordLines => write_record_lines(warehouse, writer),
        ExportFormat::AggregateTable => write_aggregate_table(warehouse, writer),
    }
    .map_err(unwritable)
}
