//! Extract, transform and load: journal events and registry facts into the
//! warehouse, in watermark-checkpointed batches.

mod coalesce;
mod config;
mod transform;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::domain::{CaseId, OrgNumber};
use crate::journal::{Journal, JournalError, Watermark};
use crate::platform::{catalog_path_for, CaseCatalog};
use crate::registry::{registry_to_events, CompanyRecord, FinancialYear, RegistryError, RegistrySource};
use crate::warehouse::{Change, RecordKey, RecordSource, WarehouseError, WarehouseRecord, WarehouseStore};

pub use coalesce::{coalesce, coalesce_traced, Coalesced};
pub use config::{EtlConfig, RegistryEndpoint, DEFAULT_BATCH_SIZE};
pub use transform::{registry_event_id, transform, transform_registry, CompanyContext};

#[derive(Debug, thiserror::Error)]
pub enum EtlError {
    #[error("invalid ETL config: {0}")]
    Config(String),
    #[error("source journal unavailable: {0}")]
    SourceUnavailable(String),
    #[error("registry stage failed for {org}: {source}")]
    Registry { org: OrgNumber, source: RegistryError },
    #[error("event {event_id} of case {case_id} cannot be resolved: {reason}")]
    OrphanEvent { event_id: u64, case_id: CaseId, reason: String },
    #[error("warehouse sink failed: {0}")]
    Sink(#[from] WarehouseError),
}

impl From<JournalError> for EtlError {
    fn from(e: JournalError) -> Self {
        EtlError::SourceUnavailable(e.to_string())
    }
}

/// Counters of one run. For the journal side,
/// `extracted - coalesced_away - skipped_consent - skipped_orphan == loaded`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EtlStats {
    pub extracted: u64,
    pub coalesced_away: u64,
    pub loaded: u64,
    pub skipped_consent: u64,
    pub skipped_orphan: u64,
    pub registry_events: u64,
    /// Records removed because their case opted out.
    pub purged: u64,
    pub batches: u64,
    pub watermark: u64,
    /// False when the run stopped early on request.
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub coalesce_window_seconds: u64,
    pub batch_size: usize,
    /// Stop after this many committed journal batches, as a crash would.
    pub stop_after_batches: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            coalesce_window_seconds: 0,
            batch_size: DEFAULT_BATCH_SIZE,
            stop_after_batches: None,
        }
    }
}

impl RunOptions {
    pub fn from_config(config: &EtlConfig) -> Self {
        Self {
            coalesce_window_seconds: config.coalesce_window_seconds,
            batch_size: config.batch_size,
            stop_after_batches: None,
        }
    }
}

/// The next batch after `watermark`; advances nothing.
pub fn extract(journal: &Journal, watermark: Watermark, batch_size: usize) -> Vec<crate::journal::JournalEvent> {
    journal
        .read_since(watermark, batch_size)
        .into_iter()
        .map(|e| (*e).clone())
        .collect()
}

/// Registry snapshot of one organization.
struct CompanyFacts {
    company: Option<CompanyRecord>,
    financials: Vec<FinancialYear>,
}

fn fetch_company_facts(registry: &dyn RegistrySource, org: &OrgNumber) -> Result<CompanyFacts, EtlError> {
    let registry_err = |source| EtlError::Registry {
        org: org.clone(),
        source,
    };
    match registry.fetch_company(org) {
        Ok(company) => {
            let financials = registry.fetch_financials(org).map_err(registry_err)?;
            Ok(CompanyFacts {
                company: Some(company),
                financials,
            })
        }
        Err(RegistryError::NotFound(_)) => Ok(CompanyFacts {
            company: None,
            financials: Vec::new(),
        }),
        Err(e) => Err(registry_err(e)),
    }
}

fn consenting(catalog: &CaseCatalog, case_id: CaseId) -> bool {
    catalog
        .get(case_id)
        .and_then(|c| c.company_link.as_ref())
        .is_none_or(|l| l.consent)
}

/// One incremental run: registry lookups, journal batches from the stored
/// watermark, registry merge, then removal of opted-out cases' records.
///
/// Each journal batch is committed together with its watermark, so a run
/// interrupted between batches resumes without duplicates or gaps. Registry
/// failures abort before anything is loaded.
pub fn run(
    journal: &Journal,
    catalog: &CaseCatalog,
    registry: Option<&dyn RegistrySource>,
    store: &mut WarehouseStore,
    options: &RunOptions,
) -> Result<EtlStats, EtlError> {
    if options.batch_size == 0 {
        return Err(EtlError::Config("batch_size must be at least 1".into()));
    }
    let mut stats = EtlStats::default();

    // Registry stage: one lookup per organization, shared by every consenting
    // case linked to it.
    let mut facts: BTreeMap<OrgNumber, CompanyFacts> = BTreeMap::new();
    let mut companies: BTreeMap<CaseId, CompanyContext> = BTreeMap::new();
    for case in catalog.cases.values() {
        let Some(link) = &case.company_link else { continue };
        if !link.consent {
            continue;
        }
        if let Some(registry) = registry {
            if !facts.contains_key(&link.organization_number) {
                let fetched = fetch_company_facts(registry, &link.organization_number)?;
                facts.insert(link.organization_number.clone(), fetched);
            }
        }
        let company = facts.get(&link.organization_number).and_then(|f| f.company.as_ref());
        if let Some(ctx) = CompanyContext::snapshot(case, company) {
            companies.insert(case.case_id, ctx);
        }
    }

    // Journal stage.
    let mut watermark = Watermark(store.checkpoint().watermark);
    loop {
        if options.stop_after_batches.is_some_and(|n| stats.batches >= n) {
            stats.watermark = watermark.0;
            return Ok(stats);
        }
        let batch = extract(journal, watermark, options.batch_size);
        let Some(last) = batch.last() else { break };
        let last_id = last.event_id;
        stats.extracted += batch.len() as u64;
        let events = coalesce(&batch, options.coalesce_window_seconds);
        stats.coalesced_away += (batch.len() - events.len()) as u64;

        let mut changes = Vec::with_capacity(events.len());
        for event in &events {
            let Some(case) = catalog.get(event.case_id) else {
                log::warn!("skipping event {}: case {} is not in the catalog", event.event_id, event.case_id);
                stats.skipped_orphan += 1;
                continue;
            };
            if !consenting(catalog, event.case_id) {
                stats.skipped_consent += 1;
                continue;
            }
            match transform(event, case, companies.get(&event.case_id)) {
                Ok(record) => changes.push(Change::Upsert(Box::new(record))),
                Err(e) => {
                    log::warn!("skipping event: {e}");
                    stats.skipped_orphan += 1;
                }
            }
        }
        stats.loaded += changes.len() as u64;
        store.commit(changes, last_id)?;
        watermark = Watermark(last_id);
        stats.batches += 1;
    }
    stats.watermark = watermark.0;

    // Registry merge: upsert current facts, drop registry records that no
    // longer apply to a consenting linked case.
    let mut changes = Vec::new();
    let mut wanted: BTreeSet<RecordKey> = BTreeSet::new();
    for case in catalog.cases.values() {
        let (Some(link), Some(company)) = (&case.company_link, companies.get(&case.case_id)) else {
            continue;
        };
        let Some(CompanyFacts {
            company: Some(record),
            financials,
        }) = facts.get(&link.organization_number)
        else {
            continue;
        };
        for event in registry_to_events(record, financials) {
            let row = transform_registry(&event, case, company);
            wanted.insert(row.key());
            changes.push(Change::Upsert(Box::new(row)));
        }
    }
    stats.registry_events = changes.len() as u64;
    for record in store.warehouse().records_of_source(RecordSource::Registry) {
        if !wanted.contains(&record.key()) && consenting(catalog, record.case_id) {
            changes.push(Change::Delete(record.key()));
        }
    }

    // Consent: opted-out cases leave the warehouse entirely.
    for case in catalog.cases.values() {
        if !consenting(catalog, case.case_id) {
            for key in store.warehouse().keys_of_case(case.case_id) {
                changes.push(Change::Delete(key));
            }
        }
    }
    let summary = store.commit(changes, stats.watermark)?;
    stats.purged = summary.deleted;
    stats.completed = true;
    Ok(stats)
}

/// Loads the journal and catalog named by `config` and runs into its
/// warehouse. `fresh` discards the warehouse first (a full rebuild).
pub fn run_with_config(
    config: &EtlConfig,
    registry: Option<&dyn RegistrySource>,
    fresh: bool,
) -> Result<EtlStats, EtlError> {
    config.validate()?;
    let journal = Journal::load(&config.source_journal_path)?;
    let catalog = CaseCatalog::load(catalog_path_for(&config.source_journal_path))
        .map_err(|e| EtlError::SourceUnavailable(format!("case catalog: {e}")))?;
    let mut store = if fresh {
        WarehouseStore::open_fresh(&config.warehouse_path)?
    } else {
        WarehouseStore::open(&config.warehouse_path)?
    };
    run(&journal, &catalog, registry, &mut store, &RunOptions::from_config(config))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EtlStatus {
    pub watermark: u64,
    pub journal_events: u64,
    pub pending: u64,
    pub journal_records: u64,
    pub registry_records: u64,
    pub commits: u64,
}

pub fn status(config: &EtlConfig) -> Result<EtlStatus, EtlError> {
    let journal = Journal::load(&config.source_journal_path)?;
    let (warehouse, checkpoint) = crate::warehouse::read_warehouse(&config.warehouse_path)?;
    let journal_events = journal.last_event_id();
    let count = |s| warehouse.records_of_source(s).count() as u64;
    Ok(EtlStatus {
        watermark: checkpoint.watermark,
        journal_events,
        pending: journal_events.saturating_sub(checkpoint.watermark),
        journal_records: count(RecordSource::Journal),
        registry_records: count(RecordSource::Registry),
        commits: checkpoint.commits,
    })
}

/// Every record passes the warehouse invariant checker.
pub fn check_records<'a>(records: impl IntoIterator<Item = &'a WarehouseRecord>) -> Result<(), String> {
    records.into_iter().try_for_each(WarehouseRecord::check)
}
