use std::collections::{BTreeMap, BTreeSet};

use crate::domain::{ActionType, CaseId, EventCategory};
use crate::time::YearMonth;

use super::record::{RecordKey, RecordSource, WarehouseRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpsertOutcome {
    Inserted,
    Updated,
    Unchanged,
}

/// The single record table, keyed by (source, event_id), with secondary
/// indexes by category, action, calendar month and case.
#[derive(Debug, Clone, Default)]
pub struct Warehouse {
    records: BTreeMap<RecordKey, WarehouseRecord>,
    by_category: BTreeMap<EventCategory, BTreeSet<RecordKey>>,
    by_action: BTreeMap<ActionType, BTreeSet<RecordKey>>,
    by_month: BTreeMap<YearMonth, BTreeSet<RecordKey>>,
    by_case: BTreeMap<CaseId, BTreeSet<RecordKey>>,
}

fn unindex<K: Ord>(index: &mut BTreeMap<K, BTreeSet<RecordKey>>, k: K, key: &RecordKey) {
    if let Some(set) = index.get_mut(&k) {
        set.remove(key);
        if set.is_empty() {
            index.remove(&k);
        }
    }
}

impl Warehouse {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, key: &RecordKey) -> Option<&WarehouseRecord> {
        self.records.get(key)
    }

    /// All records in (source, event_id) order.
    pub fn records(&self) -> impl Iterator<Item = &WarehouseRecord> {
        self.records.values()
    }

    pub fn records_of_source(&self, source: RecordSource) -> impl Iterator<Item = &WarehouseRecord> {
        self.records.values().filter(move |r| r.source == source)
    }

    pub fn upsert(&mut self, record: WarehouseRecord) -> UpsertOutcome {
        let key = record.key();
        let outcome = match self.records.get(&key) {
            Some(existing) if *existing == record => return UpsertOutcome::Unchanged,
            Some(_) => {
                self.remove(&key);
                UpsertOutcome::Updated
            }
            None => UpsertOutcome::Inserted,
        };
        self.by_category.entry(record.category).or_default().insert(key);
        self.by_action.entry(record.action).or_default().insert(key);
        self.by_month.entry(YearMonth::of(&record.timestamp)).or_default().insert(key);
        self.by_case.entry(record.case_id).or_default().insert(key);
        self.records.insert(key, record);
        outcome
    }

    pub fn remove(&mut self, key: &RecordKey) -> Option<WarehouseRecord> {
        let record = self.records.remove(key)?;
        unindex(&mut self.by_category, record.category, key);
        unindex(&mut self.by_action, record.action, key);
        unindex(&mut self.by_month, YearMonth::of(&record.timestamp), key);
        unindex(&mut self.by_case, record.case_id, key);
        Some(record)
    }

    pub fn keys_of_case(&self, case_id: CaseId) -> Vec<RecordKey> {
        self.by_case
            .get(&case_id)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    pub fn records_of_case(&self, case_id: CaseId) -> impl Iterator<Item = &WarehouseRecord> {
        self.by_case
            .get(&case_id)
            .into_iter()
            .flatten()
            .map(|k| &self.records[k])
    }

    pub fn records_of_category(&self, category: EventCategory) -> impl Iterator<Item = &WarehouseRecord> {
        self.by_category
            .get(&category)
            .into_iter()
            .flatten()
            .map(|k| &self.records[k])
    }

    pub fn records_of_action(&self, action: ActionType) -> impl Iterator<Item = &WarehouseRecord> {
        self.by_action
            .get(&action)
            .into_iter()
            .flatten()
            .map(|k| &self.records[k])
    }

    pub fn records_of_month(&self, month: YearMonth) -> impl Iterator<Item = &WarehouseRecord> {
        self.by_month
            .get(&month)
            .into_iter()
            .flatten()
            .map(|k| &self.records[k])
    }

    pub fn months(&self) -> impl Iterator<Item = YearMonth> + '_ {
        self.by_month.keys().copied()
    }

    pub fn cases(&self) -> impl Iterator<Item = CaseId> + '_ {
        self.by_case.keys().copied()
    }

    pub fn contains_case(&self, case_id: CaseId) -> bool {
        self.by_case.contains_key(&case_id)
    }
}
