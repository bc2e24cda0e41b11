use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::Serialize;

use crate::domain::{ActionType, CaseId, CategoryPayload, EventCategory, Quantity};
use crate::time::{year_end, Timestamp, YearMonth};

use super::record::{RecordSource, WarehouseRecord};
use super::table::Warehouse;
use super::WarehouseError;

/// Category × action counts over journal-sourced records.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryActionTable {
    counts: BTreeMap<EventCategory, [u64; 4]>,
}

impl CategoryActionTable {
    pub fn get(&self, category: EventCategory, action: ActionType) -> u64 {
        self.row(category)[action.index()]
    }

    pub fn row(&self, category: EventCategory) -> [u64; 4] {
        self.counts.get(&category).copied().unwrap_or_default()
    }

    /// Categories with at least one event, ascending by id.
    pub fn rows(&self) -> impl Iterator<Item = (EventCategory, [u64; 4])> + '_ {
        self.counts.iter().map(|(c, r)| (*c, *r))
    }

    pub fn column_total(&self, action: ActionType) -> u64 {
        self.counts.values().map(|r| r[action.index()]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().flatten().sum()
    }

    fn add(&mut self, category: EventCategory, action: ActionType) {
        self.counts.entry(category).or_default()[action.index()] += 1;
    }
}

pub fn aggregate_category_action(warehouse: &Warehouse) -> CategoryActionTable {
    let mut table = CategoryActionTable::default();
    for record in warehouse.records_of_source(RecordSource::Journal) {
        table.add(record.category, record.action);
    }
    table
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Action,
    Category,
}

impl FromStr for GroupBy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "action" => Ok(GroupBy::Action),
            "category" => Ok(GroupBy::Category),
            other => Err(format!("unknown grouping {other:?}, expected action or category")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Breakdown {
    Action(ActionType),
    Category(EventCategory),
}

impl fmt::Display for Breakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Breakdown::Action(a) => f.write_str(a.as_str()),
            Breakdown::Category(c) => f.write_str(c.name()),
        }
    }
}

/// Journal-sourced record counts per UTC calendar month. Months without
/// events are absent.
pub type MonthlyTable = BTreeMap<YearMonth, BTreeMap<Breakdown, u64>>;

pub fn aggregate_monthly(warehouse: &Warehouse, group_by: GroupBy) -> MonthlyTable {
    let mut table = MonthlyTable::new();
    for month in warehouse.months() {
        let mut bucket = BTreeMap::new();
        for record in warehouse
            .records_of_month(month)
            .filter(|r| r.source == RecordSource::Journal)
        {
            let key = match group_by {
                GroupBy::Action => Breakdown::Action(record.action),
                GroupBy::Category => Breakdown::Category(record.category),
            };
            *bucket.entry(key).or_insert(0) += 1;
        }
        if !bucket.is_empty() {
            table.insert(month, bucket);
        }
    }
    table
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseStats {
    pub mean: f64,
    pub min: u64,
    pub max: u64,
    pub per_case: BTreeMap<CaseId, u64>,
}

impl CaseStats {
    pub fn total(&self) -> u64 {
        self.per_case.values().sum()
    }
}

/// Journal-sourced events per case.
pub fn events_per_case(warehouse: &Warehouse) -> Result<CaseStats, WarehouseError> {
    let mut per_case = BTreeMap::new();
    for record in warehouse.records_of_source(RecordSource::Journal) {
        *per_case.entry(record.case_id).or_insert(0u64) += 1;
    }
    if per_case.is_empty() {
        return Err(WarehouseError::EmptyWarehouse);
    }
    let total: u64 = per_case.values().sum();
    Ok(CaseStats {
        mean: total as f64 / per_case.len() as f64,
        min: *per_case.values().min().expect("non-empty"),
        max: *per_case.values().max().expect("non-empty"),
        per_case,
    })
}

/// `name = value` lines; blank lines and `#` comments are skipped.
fn parse_assignments(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `name = value`", idx + 1))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(format!("line {}: empty name", idx + 1));
        }
        out.push((name.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Named, pairwise-disjoint category groups the success score counts over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupMap {
    groups: BTreeMap<String, BTreeSet<EventCategory>>,
}

impl Default for GroupMap {
    fn default() -> Self {
        let ids = |r: std::ops::RangeInclusive<u8>| r.filter_map(EventCategory::from_id).collect::<BTreeSet<_>>();
        Self {
            groups: BTreeMap::from([
                ("BI".to_string(), ids(6..=9)),
                ("BM".to_string(), ids(10..=15)),
                ("PD".to_string(), ids(17..=19)),
                ("CI".to_string(), ids(20..=22)),
            ]),
        }
    }
}

impl GroupMap {
    pub fn new(groups: BTreeMap<String, BTreeSet<EventCategory>>) -> Result<Self, WarehouseError> {
        let mut seen = BTreeMap::new();
        for (name, categories) in &groups {
            for category in categories {
                if let Some(other) = seen.insert(*category, name) {
                    return Err(WarehouseError::InvalidGroupMap(format!(
                        "category {} is in both {other} and {name}",
                        category.id()
                    )));
                }
            }
        }
        Ok(Self { groups })
    }

    /// Parses `group = id,id,...` lines.
    pub fn parse(text: &str) -> Result<Self, WarehouseError> {
        let mut groups = BTreeMap::new();
        for (name, value) in parse_assignments(text).map_err(WarehouseError::InvalidGroupMap)? {
            let mut set = BTreeSet::new();
            for raw in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let category = raw
                    .parse::<u8>()
                    .ok()
                    .and_then(EventCategory::from_id)
                    .ok_or_else(|| WarehouseError::InvalidGroupMap(format!("{name}: {raw:?} is not a category id 1-34")))?;
                set.insert(category);
            }
            if groups.insert(name.clone(), set).is_some() {
                return Err(WarehouseError::InvalidGroupMap(format!("group {name} defined twice")));
            }
        }
        Self::new(groups)
    }

    pub fn groups(&self) -> impl Iterator<Item = (&str, &BTreeSet<EventCategory>)> {
        self.groups.iter().map(|(n, s)| (n.as_str(), s))
    }

    pub fn group_of(&self, category: EventCategory) -> Option<&str> {
        self.groups
            .iter()
            .find(|(_, set)| set.contains(&category))
            .map(|(n, _)| n.as_str())
    }
}

/// Per-group weights; groups without an entry weigh 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Weights(BTreeMap<String, Decimal>);

impl Weights {
    pub fn new(weights: BTreeMap<String, Decimal>) -> Self {
        Self(weights)
    }

    /// Parses `group = weight` lines.
    pub fn parse(text: &str) -> Result<Self, WarehouseError> {
        let mut weights = BTreeMap::new();
        for (name, value) in parse_assignments(text).map_err(WarehouseError::InvalidWeights)? {
            let weight = Decimal::from_str(&value)
                .map_err(|e| WarehouseError::InvalidWeights(format!("{name}: {value:?}: {e}")))?;
            weights.insert(name, weight);
        }
        Ok(Self(weights))
    }

    pub fn weight(&self, group: &str) -> Decimal {
        self.0.get(group).copied().unwrap_or(Decimal::ONE)
    }

    /// Every weight multiplied by `factor`, including the implicit unit ones
    /// of `groups`.
    pub fn scaled<'a>(&self, factor: Decimal, groups: impl IntoIterator<Item = &'a str>) -> Self {
        let mut out: BTreeMap<String, Decimal> = self.0.iter().map(|(g, w)| (g.clone(), w * factor)).collect();
        for group in groups {
            out.entry(group.to_string()).or_insert(factor);
        }
        Self(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuccessScore {
    pub case_id: CaseId,
    pub delta_counts: BTreeMap<String, u64>,
    pub weights: BTreeMap<String, Decimal>,
    pub s_value: Decimal,
}

fn score_records<'a>(
    case_id: CaseId,
    records: impl Iterator<Item = &'a WarehouseRecord>,
    groups: &GroupMap,
    weights: &Weights,
) -> SuccessScore {
    let mut delta_counts: BTreeMap<String, u64> = groups.groups().map(|(n, _)| (n.to_string(), 0)).collect();
    for record in records.filter(|r| r.action != ActionType::Move) {
        if let Some(group) = groups.group_of(record.category) {
            *delta_counts.get_mut(group).expect("seeded above") += 1;
        }
    }
    let weights: BTreeMap<String, Decimal> = delta_counts.keys().map(|g| (g.clone(), weights.weight(g))).collect();
    let s_value = delta_counts
        .iter()
        .map(|(g, n)| weights[g] * Decimal::from(*n))
        .sum();
    SuccessScore {
        case_id,
        delta_counts,
        weights,
        s_value,
    }
}

/// Counts the case's Create/Update/Delete events per group and weighs them.
pub fn success_score(
    warehouse: &Warehouse,
    case_id: CaseId,
    groups: &GroupMap,
    weights: &Weights,
) -> Result<SuccessScore, WarehouseError> {
    success_score_through(warehouse, case_id, groups, weights, None)
}

/// As [`success_score`], counting only events stamped at or before `through`.
pub fn success_score_through(
    warehouse: &Warehouse,
    case_id: CaseId,
    groups: &GroupMap,
    weights: &Weights,
    through: Option<Timestamp>,
) -> Result<SuccessScore, WarehouseError> {
    if !warehouse.contains_case(case_id) {
        return Err(WarehouseError::UnknownCase(case_id));
    }
    let records = warehouse
        .records_of_case(case_id)
        .filter(|r| through.is_none_or(|t| r.timestamp <= t));
    Ok(score_records(case_id, records, groups, weights))
}

/// Every case's score, highest first (ties by case id).
pub fn rank_cases(warehouse: &Warehouse, groups: &GroupMap, weights: &Weights) -> Vec<SuccessScore> {
    let mut scores: Vec<_> = warehouse
        .cases()
        .map(|case| score_records(case, warehouse.records_of_case(case), groups, weights))
        .collect();
    scores.sort_by(|a, b| b.s_value.cmp(&a.s_value).then(a.case_id.cmp(&b.case_id)));
    scores
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FinancialRow {
    pub year: i32,
    pub s_value_through_year: Decimal,
    pub revenue: Option<Quantity>,
    pub profit_loss: Option<Quantity>,
    pub employees: Option<Quantity>,
}

/// Pairs each registry year of the case's company with the cumulative success
/// score of the case's events up to that year's end.
pub fn join_financials(
    warehouse: &Warehouse,
    case_id: CaseId,
    groups: &GroupMap,
    weights: &Weights,
) -> Result<Vec<FinancialRow>, WarehouseError> {
    let mut years: BTreeMap<i32, FinancialRow> = BTreeMap::new();
    for record in warehouse
        .records_of_case(case_id)
        .filter(|r| r.source == RecordSource::Registry)
    {
        let CategoryPayload::Financial(f) = &record.payload else {
            continue;
        };
        let row = years.entry(f.year).or_insert_with(|| FinancialRow {
            year: f.year,
            s_value_through_year: Decimal::ZERO,
            revenue: None,
            profit_loss: None,
            employees: None,
        });
        match record.category {
            EventCategory::Revenue => row.revenue = Some(f.value),
            EventCategory::ProfitLoss => row.profit_loss = Some(f.value),
            EventCategory::NumberOfEmployees => row.employees = Some(f.value),
            _ => {}
        }
    }
    if years.is_empty() {
        return Err(WarehouseError::NoFinancials(case_id));
    }
    for row in years.values_mut() {
        row.s_value_through_year =
            success_score_through(warehouse, case_id, groups, weights, Some(year_end(row.year)))?.s_value;
    }
    Ok(years.into_values().collect())
}
