use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::domain::{ActionType, CaseId, CaseRole, CategoryPayload, EventCategory, Source};
use crate::time::{format_timestamp, parse_timestamp, year_end, Timestamp};

/// Where a warehouse record came from. Event ids are unique only within a source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordSource {
    Journal,
    Registry,
}

impl RecordSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecordSource::Journal => "journal",
            RecordSource::Registry => "registry",
        }
    }
}

impl fmt::Display for RecordSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RecordKey {
    pub source: RecordSource,
    pub event_id: u64,
}

/// One row of the single-table warehouse.
#[derive(Debug, Clone, PartialEq)]
pub struct WarehouseRecord {
    pub source: RecordSource,
    pub case_id: CaseId,
    pub case_title: String,
    pub event_id: u64,
    pub timestamp: Timestamp,
    pub category: EventCategory,
    pub action: ActionType,
    /// Null for registry-sourced records.
    pub case_participant: Option<String>,
    pub company_name: Option<String>,
    pub organization_number: Option<String>,
    pub country: Option<String>,
    pub postcode: Option<String>,
    pub nace_code: Option<String>,
    pub added_by_case_role: Option<CaseRole>,
    pub client_id: String,
    pub relating_to_whole_company: bool,
    pub event_title: String,
    pub event_description: String,
    pub idea_model_title: Option<String>,
    pub payload: CategoryPayload,
}

pub const COMMON_COLUMNS: [&str; 17] = [
    "case_id",
    "case_title",
    "event_id",
    "timestamp",
    "event_category",
    "action_type",
    "case_participant",
    "company_name",
    "organization_number",
    "country",
    "postcode",
    "nace_code",
    "added_by_case_role",
    "client_id",
    "relating_to_whole_company",
    "event_title",
    "event_description",
];

/// Payload field to warehouse column, per category, in column order.
fn column_map(category: EventCategory) -> &'static [(&'static str, &'static str)] {
    match category.id() {
        1 => &[("participant_type", "case_participant_type")],
        2 => &[
            ("canvas_model", "business_model_type"),
            ("period_months", "timespan"),
            ("rolling", "forecast_type"),
        ],
        3..=15 => &[],
        16 => &[("polarity", "gap"), ("subject_company", "competitor_name")],
        17 => &[
            ("objective_category", "objective_category"),
            ("objective_type", "objective_type"),
            ("actual_vs_forecast", "objective_actual_vs_forecast"),
            ("month", "objective_month"),
            ("value", "objective_value"),
        ],
        18 => &[
            ("kind", "opportunity_threat"),
            ("probability", "probability"),
            ("consequence", "consequence"),
        ],
        19 => &[
            ("cost_group", "cost_group"),
            ("month", "task_month"),
            ("actual_vs_forecast", "task_actual_vs_forecast"),
            ("value", "task_value"),
            ("status", "task_status"),
            ("recurrence", "task_recurrence"),
        ],
        20 | 21 => &[("average_score", "average_score"), ("customer_added", "customer_added")],
        22 => &[
            ("customers_low", "customers_low"),
            ("customers_high", "customers_high"),
            ("share_low", "market_share_low"),
            ("share_high", "market_share_high"),
            ("value_per_customer_low", "value_per_customer_low"),
            ("value_per_customer_high", "value_per_customer_high"),
        ],
        23 | 33 => &[("year", "fiscal_year"), ("status", "registration_status")],
        24 => &[("year", "fiscal_year"), ("value", "yearly_revenue")],
        25 => &[("year", "fiscal_year"), ("value", "yearly_profit_loss")],
        26 => &[("year", "fiscal_year"), ("value", "yearly_balance_sum")],
        27 => &[("year", "fiscal_year"), ("value", "yearly_return_on_assets")],
        28 => &[("year", "fiscal_year"), ("value", "yearly_profit_loss_pct")],
        29 => &[("year", "fiscal_year"), ("value", "yearly_return_on_equity")],
        30 => &[("year", "fiscal_year"), ("value", "yearly_current_ratio")],
        31 => &[("year", "fiscal_year"), ("value", "yearly_equity_ratio")],
        32 => &[("year", "fiscal_year"), ("value", "yearly_gearing")],
        _ => &[("year", "fiscal_year"), ("value", "number_of_employees")],
    }
}

pub const SPECIFIC_COLUMNS: [&str; 40] = [
    "case_participant_type",
    "business_model_type",
    "timespan",
    "forecast_type",
    "gap",
    "competitor_name",
    "objective_category",
    "objective_type",
    "objective_actual_vs_forecast",
    "objective_month",
    "objective_value",
    "opportunity_threat",
    "probability",
    "consequence",
    "cost_group",
    "task_month",
    "task_actual_vs_forecast",
    "task_value",
    "task_status",
    "task_recurrence",
    "average_score",
    "customer_added",
    "customers_low",
    "customers_high",
    "market_share_low",
    "market_share_high",
    "value_per_customer_low",
    "value_per_customer_high",
    "fiscal_year",
    "registration_status",
    "yearly_revenue",
    "yearly_profit_loss",
    "yearly_balance_sum",
    "yearly_return_on_assets",
    "yearly_profit_loss_pct",
    "yearly_return_on_equity",
    "yearly_current_ratio",
    "yearly_equity_ratio",
    "yearly_gearing",
    "number_of_employees",
];

/// Every column of the flat table in export order: source, the common fields,
/// the idea/model link, then all category-specific columns.
pub fn columns() -> Vec<&'static str> {
    let mut out = Vec::with_capacity(1 + COMMON_COLUMNS.len() + 1 + SPECIFIC_COLUMNS.len());
    out.push("source");
    out.extend(COMMON_COLUMNS);
    out.push("idea_model_title");
    out.extend(SPECIFIC_COLUMNS);
    out
}

/// The category-specific columns a record of `category` populates.
pub fn specific_columns(category: EventCategory) -> impl Iterator<Item = &'static str> {
    column_map(category).iter().map(|(_, col)| *col)
}

fn opt_str(v: &Option<String>) -> Value {
    v.as_ref().map_or(Value::Null, |s| Value::String(s.clone()))
}

fn to_column_value(column: &str, value: Value) -> Value {
    match (column, value) {
        ("forecast_type", Value::Bool(rolling)) => Value::String(if rolling { "Rolling" } else { "Fixed" }.into()),
        (_, v) => v,
    }
}

fn from_column_value(column: &str, value: Value) -> Result<Value, String> {
    match (column, value) {
        ("forecast_type", Value::String(s)) => match s.as_str() {
            "Rolling" => Ok(Value::Bool(true)),
            "Fixed" => Ok(Value::Bool(false)),
            other => Err(format!("forecast_type must be Rolling or Fixed, got {other:?}")),
        },
        (_, v) => Ok(v),
    }
}

impl WarehouseRecord {
    pub fn key(&self) -> RecordKey {
        RecordKey {
            source: self.source,
            event_id: self.event_id,
        }
    }

    /// Flat row with every column present, absent values as explicit nulls.
    pub fn to_row(&self) -> Map<String, Value> {
        let mut row = Map::new();
        row.insert("source".into(), Value::String(self.source.as_str().into()));
        row.insert("case_id".into(), Value::from(self.case_id.0));
        row.insert("case_title".into(), Value::String(self.case_title.clone()));
        row.insert("event_id".into(), Value::from(self.event_id));
        row.insert("timestamp".into(), Value::String(format_timestamp(&self.timestamp)));
        row.insert("event_category".into(), Value::from(self.category.id()));
        row.insert("action_type".into(), Value::String(self.action.as_str().into()));
        row.insert("case_participant".into(), opt_str(&self.case_participant));
        row.insert("company_name".into(), opt_str(&self.company_name));
        row.insert("organization_number".into(), opt_str(&self.organization_number));
        row.insert("country".into(), opt_str(&self.country));
        row.insert("postcode".into(), opt_str(&self.postcode));
        row.insert("nace_code".into(), opt_str(&self.nace_code));
        row.insert(
            "added_by_case_role".into(),
            self.added_by_case_role
                .map_or(Value::Null, |r| serde_json::to_value(r).expect("enum serializes")),
        );
        row.insert("client_id".into(), Value::String(self.client_id.clone()));
        row.insert("relating_to_whole_company".into(), Value::Bool(self.relating_to_whole_company));
        row.insert("event_title".into(), Value::String(self.event_title.clone()));
        row.insert("event_description".into(), Value::String(self.event_description.clone()));
        row.insert("idea_model_title".into(), opt_str(&self.idea_model_title));

        let mut fields = self.payload.to_fields();
        let map = column_map(self.category);
        for column in SPECIFIC_COLUMNS.iter() {
            let value = map
                .iter()
                .find(|(_, col)| col == column)
                .and_then(|(field, _)| fields.remove(*field))
                .map_or(Value::Null, |v| to_column_value(column, v));
            row.insert((*column).into(), value);
        }
        row
    }

    /// The row without its null columns.
    pub fn to_compact_row(&self) -> Map<String, Value> {
        let mut row = self.to_row();
        row.retain(|_, v| !v.is_null());
        row
    }

    /// Inverse of [`to_compact_row`](Self::to_compact_row).
    pub fn from_compact_row(mut row: Map<String, Value>) -> Result<Self, String> {
        for column in columns() {
            if !row.contains_key(column) {
                row.insert(column.to_string(), Value::Null);
            }
        }
        Self::from_row(row)
    }

    /// Inverse of [`to_row`](Self::to_row). Requires exactly the known columns.
    pub fn from_row(mut row: Map<String, Value>) -> Result<Self, String> {
        let all = columns();
        if let Some(extra) = row.keys().find(|k| !all.contains(&k.as_str())) {
            return Err(format!("unknown column {extra:?}"));
        }
        if let Some(missing) = all.iter().find(|c| !row.contains_key(**c)) {
            return Err(format!("missing column {missing:?}"));
        }
        fn take<T: serde::de::DeserializeOwned>(row: &mut Map<String, Value>, col: &str) -> Result<T, String> {
            serde_json::from_value(row.remove(col).unwrap_or(Value::Null)).map_err(|e| format!("column {col}: {e}"))
        }
        let source: RecordSource = take(&mut row, "source")?;
        let category_id: u8 = take(&mut row, "event_category")?;
        let category = EventCategory::from_id(category_id).ok_or_else(|| format!("unknown category {category_id}"))?;
        let action_raw: String = take(&mut row, "action_type")?;
        let action: ActionType = action_raw.parse().map_err(|e| format!("action_type: {e}"))?;
        let ts_raw: String = take(&mut row, "timestamp")?;
        let timestamp = parse_timestamp(&ts_raw).map_err(|e| format!("timestamp {ts_raw:?}: {e}"))?;

        let map = column_map(category);
        let mut fields = Map::new();
        for column in SPECIFIC_COLUMNS.iter() {
            let value = row.remove(*column).unwrap_or(Value::Null);
            match map.iter().find(|(_, col)| col == column) {
                Some((field, _)) => {
                    fields.insert((*field).into(), from_column_value(column, value)?);
                }
                None if !value.is_null() => {
                    return Err(format!("column {column} must be null for category {category_id}"));
                }
                None => {}
            }
        }
        let payload = CategoryPayload::from_fields(category, &fields).map_err(|e| e.to_string())?;

        Ok(WarehouseRecord {
            source,
            case_id: CaseId(take(&mut row, "case_id")?),
            case_title: take(&mut row, "case_title")?,
            event_id: take(&mut row, "event_id")?,
            timestamp,
            category,
            action,
            case_participant: take(&mut row, "case_participant")?,
            company_name: take(&mut row, "company_name")?,
            organization_number: take(&mut row, "organization_number")?,
            country: take(&mut row, "country")?,
            postcode: take(&mut row, "postcode")?,
            nace_code: take(&mut row, "nace_code")?,
            added_by_case_role: take(&mut row, "added_by_case_role")?,
            client_id: take(&mut row, "client_id")?,
            relating_to_whole_company: take(&mut row, "relating_to_whole_company")?,
            event_title: take(&mut row, "event_title")?,
            event_description: take(&mut row, "event_description")?,
            idea_model_title: take(&mut row, "idea_model_title")?,
            payload,
        })
    }

    /// Full record invariant check: payload shape, source-specific nulls and
    /// year-end stamping of registry facts.
    pub fn check(&self) -> Result<(), String> {
        self.payload
            .validate(self.category)
            .map_err(|e| format!("event {}: {e}", self.event_id))?;
        if self.action == ActionType::Move && self.category != EventCategory::Task {
            return Err(format!("event {}: Move on category {}", self.event_id, self.category.id()));
        }
        let is_registry_category = self.category.source() == Source::Proff;
        match self.source {
            RecordSource::Journal => {
                if is_registry_category {
                    return Err(format!("journal event {} has a registry category", self.event_id));
                }
                if self.case_participant.is_none() || self.added_by_case_role.is_none() {
                    return Err(format!("journal event {} lacks participant context", self.event_id));
                }
            }
            RecordSource::Registry => {
                if !is_registry_category {
                    return Err(format!("registry event {} has a platform category", self.event_id));
                }
                if self.case_participant.is_some() || self.added_by_case_role.is_some() {
                    return Err(format!("registry event {} carries participant fields", self.event_id));
                }
                if self.organization_number.is_none() {
                    return Err(format!("registry event {} lacks an organization number", self.event_id));
                }
                let year = match &self.payload {
                    CategoryPayload::Financial(f) => f.year,
                    CategoryPayload::Registration(r) => r.year,
                    _ => unreachable!("validated above"),
                };
                if self.timestamp != year_end(year) {
                    return Err(format!("registry event {} is not stamped at year end", self.event_id));
                }
            }
        }
        if self.organization_number.is_none()
            && [&self.company_name, &self.country, &self.postcode, &self.nace_code]
                .iter()
                .any(|f| f.is_some())
        {
            return Err(format!("event {}: company fields without an organization number", self.event_id));
        }
        Ok(())
    }
}
