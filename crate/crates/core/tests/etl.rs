use std::sync::Arc;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use serde_json::{json, Value};

use edw_core::domain::{
    Board, CanvasModel, CardId, CaseId, CaseRole, CaseSettings, CategoryPayload, Level, OrgNumber, Participant,
    ParticipantId, ParticipantType, RiskFields, RiskKind,
};
use edw_core::etl::{
    check_records, coalesce, coalesce_traced, extract, run, run_with_config, status, EtlConfig, EtlError,
    RegistryEndpoint, RunOptions,
};
use edw_core::journal::{DraftEvent, Journal, ManualClock, Watermark};
use edw_core::platform::{CardAction, CardMutation, NewCase, NewCompanyLink, Platform};
use edw_core::registry::{
    CompanyRecord, FinancialYear, FixtureDocument, FixtureRegistry, RegistryError, RegistrySource,
};
use edw_core::warehouse::{RecordSource, WarehouseError, WarehouseStore};
use edw_core::{ActionType, EventCategory};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/registry.ndjson");

fn clock() -> Arc<ManualClock> {
    Arc::new(ManualClock::new(Utc.with_ymd_and_hms(2017, 3, 6, 10, 0, 0).unwrap()))
}

fn owner(id: &str) -> Participant {
    Participant {
        participant_id: ParticipantId::new(id),
        name: id.to_uppercase(),
        case_role: CaseRole::Enabler,
        participant_type: ParticipantType::Employee,
        internal: false,
    }
}

fn settings() -> CaseSettings {
    CaseSettings {
        period_months: 6,
        rolling: false,
        canvas_model: CanvasModel::Bmc,
        template_id: "partner-7".into(),
        relates_to_whole_company: false,
    }
}

fn case_with(p: &Platform, title: &str, who: &str, org: Option<(&str, &str)>) -> CaseId {
    p.create_case(NewCase {
        title: title.into(),
        settings: settings(),
        owner: owner(who),
        company: org.map(|(name, number)| NewCompanyLink {
            company_name: name.into(),
            organization_number: number.into(),
            country: "NO".into(),
        }),
        period_start: None,
    })
    .unwrap()
    .0
    .case_id
}

fn add_card(p: &Platform, case: CaseId, who: &str, board: Board, box_name: &str) -> CardId {
    p.mutate_card(case, &ParticipantId::new(who), CardMutation::new(board, box_name, CardAction::Create).title(box_name))
        .unwrap()
        .card_id
}

fn options(window: u64, batch: usize) -> RunOptions {
    RunOptions {
        coalesce_window_seconds: window,
        batch_size: batch,
        stop_after_batches: None,
    }
}

fn fixture_registry() -> FixtureRegistry {
    FixtureRegistry::from_file(FIXTURE).unwrap()
}

#[test]
fn config_round_trips_and_resolves_paths() {
    let dir = tempfile::tempdir().unwrap();
    let text = "# nightly\ncoalesce_window_seconds = 30\nbatch_size = 250\nsource_journal_path = data/journal.ndjson\nregistry_endpoint = http://127.0.0.1:8700\nwarehouse_path = /var/edw\n";
    let config = EtlConfig::parse(text, dir.path()).unwrap();
    assert_eq!(config.coalesce_window_seconds, 30);
    assert_eq!(config.batch_size, 250);
    assert_eq!(config.source_journal_path, dir.path().join("data/journal.ndjson"));
    assert_eq!(config.registry_endpoint, Some(RegistryEndpoint::Http("http://127.0.0.1:8700".into())));
    assert_eq!(EtlConfig::parse(&config.to_text(), dir.path()).unwrap(), config);

    let fixture = EtlConfig::parse("source_journal_path = j\nwarehouse_path = w\nregistry_endpoint = reg.ndjson\n", dir.path()).unwrap();
    assert_eq!(fixture.registry_endpoint, Some(RegistryEndpoint::Fixture(dir.path().join("reg.ndjson"))));
    assert_eq!(fixture.batch_size, edw_core::etl::DEFAULT_BATCH_SIZE);
    assert_eq!(fixture.coalesce_window_seconds, 0);

    for bad in [
        "source_journal_path = j\nwarehouse_path = w\nbatch_size = 0\n",
        "source_journal_path = j\n",
        "source_journal_path = j\nwarehouse_path = w\nunknown = 1\n",
        "source_journal_path = j\nwarehouse_path = w\nbatch_size = many\n",
        "no equals sign\n",
    ] {
        let parsed = EtlConfig::parse(bad, dir.path()).and_then(|c| c.validate().map(|_| c));
        assert!(matches!(parsed, Err(EtlError::Config(_))), "{bad}");
    }
}

#[test]
fn extract_pages_through_the_journal() {
    let journal = Journal::in_memory(clock());
    assert!(extract(&journal, Watermark(0), 4).is_empty());
    for i in 0..10 {
        journal
            .append(DraftEvent {
                case_id: CaseId(1),
                card_id: CardId::new(format!("c{i}")),
                category: EventCategory::Values,
                action: ActionType::Create,
                participant_id: ParticipantId::new("p"),
                title: String::new(),
                description: String::new(),
                payload: CategoryPayload::None,
                idea_ref: None,
            })
            .unwrap();
    }
    let mut sizes = Vec::new();
    let mut wm = Watermark(0);
    loop {
        let batch = extract(&journal, wm, 4);
        let Some(last) = batch.last() else { break };
        wm = Watermark(last.event_id);
        sizes.push(batch.len());
    }
    assert_eq!(sizes, [4, 4, 2]);
    let suffix = extract(&journal, Watermark(7), 100);
    assert_eq!(suffix.iter().map(|e| e.event_id).collect::<Vec<_>>(), [8, 9, 10]);
}

#[test]
fn coalescing_examples() {
    let c = clock();
    let p = Platform::in_memory(c.clone(), None);
    let case = case_with(&p, "Coalesce", "ola", None);
    let card = add_card(&p, case, "ola", Board::Resource, "Vision");
    let update = |text: &str| {
        p.mutate_card(
            case,
            &ParticipantId::new("ola"),
            CardMutation::new(Board::Resource, "Vision", CardAction::Update).card(card.clone()).description(text),
        )
        .unwrap()
    };
    c.advance(10);
    update("first");
    c.advance(40);
    update("second");
    let batch: Vec<_> = p.journal().events().iter().map(|e| (**e).clone()).collect();
    assert_eq!(coalesce(&batch, 0), batch);

    let merged = coalesce(&batch, 30);
    // Settings create, merged vision create, late update.
    assert_eq!(merged.len(), 3);
    assert_eq!(merged[1].action, ActionType::Create);
    assert_eq!(merged[1].event_id, batch[1].event_id);
    assert_eq!(merged[1].timestamp, batch[1].timestamp);
    assert_eq!(merged[1].description, "first");
    assert_eq!(merged[2].description, "second");
}

fn random_batch(ops: &[(u8, u8, u8, u16)]) -> Vec<edw_core::JournalEvent> {
    let c = clock();
    let journal = Journal::in_memory(c.clone());
    let mut live = [false; 4];
    let mut dead = [false; 4];
    for &(card, who, kind, gap) in ops {
        let card = (card % 4) as usize;
        c.advance(i64::from(gap % 50));
        let action = if dead[card] {
            continue;
        } else if !live[card] {
            ActionType::Create
        } else if kind % 9 == 0 {
            ActionType::Delete
        } else {
            ActionType::Update
        };
        live[card] = true;
        dead[card] = action == ActionType::Delete;
        journal
            .append(DraftEvent {
                case_id: CaseId(1),
                card_id: CardId::new(format!("c{card}")),
                category: EventCategory::Vision,
                action,
                participant_id: ParticipantId::new(format!("p{}", who % 2)),
                title: String::new(),
                description: format!("{gap}"),
                payload: CategoryPayload::None,
                idea_ref: None,
            })
            .unwrap();
    }
    journal.events().iter().map(|e| (**e).clone()).collect()
}

proptest! {
    #[test]
    fn coalescing_preserves_order_and_boundaries(
        ops in prop::collection::vec((any::<u8>(), any::<u8>(), any::<u8>(), any::<u16>()), 1..50),
        window in 0u64..120,
    ) {
        let batch = random_batch(&ops);
        let traced = coalesce_traced(&batch, window);
        let ids: Vec<u64> = traced.events.iter().map(|e| e.event_id).collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        prop_assert_eq!(&ids, &sorted);
        prop_assert_eq!(traced.events.len() + traced.absorbed.len(), batch.len());
        for (absorbed, survivor) in &traced.absorbed {
            let a = batch.iter().find(|e| e.event_id == *absorbed).unwrap();
            let s = batch.iter().find(|e| e.event_id == *survivor).unwrap();
            prop_assert_eq!(&a.card_id, &s.card_id);
            prop_assert_eq!(&a.participant_id, &s.participant_id);
        }
        // Deletes and the first Create of every card always survive as themselves.
        for e in batch.iter().filter(|e| e.action == ActionType::Delete) {
            prop_assert!(traced.events.iter().any(|s| s.event_id == e.event_id && s.action == ActionType::Delete));
        }
    }
}

#[test]
fn records_carry_case_company_and_payload_context() {
    let registry: Arc<dyn RegistrySource> = Arc::new(fixture_registry());
    let p = Platform::in_memory(clock(), Some(registry.clone()));
    let linked = case_with(&p, "Fjordlys", "kari", Some(("Fjordlys Teknologi AS", "915429785")));
    let loose = case_with(&p, "Garage idea", "nils", None);
    add_card(&p, linked, "kari", Board::BusinessModel, "Product Feature");
    add_card(&p, loose, "nils", Board::BusinessModel, "Product Feature");
    p.mutate_card(
        loose,
        &ParticipantId::new("nils"),
        CardMutation::new(Board::Risk, "Opportunities & Threats", CardAction::Create).payload(&CategoryPayload::Risk(
            RiskFields {
                kind: RiskKind::Threat,
                probability: Level::Medium,
                consequence: Level::High,
            },
        )),
    )
    .unwrap();

    let dir = tempfile::tempdir().unwrap();
    let mut store = WarehouseStore::open_fresh(dir.path()).unwrap();
    run(p.journal(), &p.catalog(), Some(registry.as_ref()), &mut store, &options(0, 100)).unwrap();
    let wh = store.warehouse();
    check_records(wh.records()).unwrap();

    let row = |case: CaseId, category: u8| -> serde_json::Map<String, Value> {
        wh.records_of_case(case)
            .find(|r| r.source == RecordSource::Journal && r.category.id() == category)
            .unwrap()
            .to_row()
    };
    let feature = row(linked, 12);
    assert_eq!(feature["nace_code"], json!("62.010"));
    assert_eq!(feature["postcode"], json!("7030"));
    assert_eq!(feature["organization_number"], json!("915429785"));
    assert_eq!(feature["added_by_case_role"], json!("Enabler"));
    assert_eq!(feature["client_id"], json!("partner-7"));
    assert_eq!(feature["relating_to_whole_company"], json!(false));

    let garage = row(loose, 12);
    for field in ["company_name", "organization_number", "country", "postcode", "nace_code"] {
        assert_eq!(garage[field], Value::Null, "{field}");
    }

    let risk = row(loose, 18);
    assert_eq!(risk["probability"], json!("Medium"));
    assert_eq!(risk["consequence"], json!("High"));
    for field in ["cost_group", "task_status", "average_score", "customers_low", "yearly_revenue", "gap"] {
        assert_eq!(risk[field], Value::Null, "{field}");
    }
    assert_eq!(risk.len(), edw_core::warehouse::columns().len());
}

#[test]
fn runs_are_conservative_and_idempotent() {
    let registry = fixture_registry();
    let c = clock();
    let p = Platform::in_memory(c.clone(), Some(Arc::new(fixture_registry())));
    let linked = case_with(&p, "Fjordlys", "kari", Some(("Fjordlys Teknologi AS", "915429785")));
    let other = case_with(&p, "Other", "nils", None);
    for i in 0..12 {
        c.advance(5);
        let card = add_card(&p, if i % 2 == 0 { linked } else { other }, if i % 2 == 0 { "kari" } else { "nils" }, Board::Resource, "Values");
        c.advance(5);
        let (case, who) = if i % 2 == 0 { (linked, "kari") } else { (other, "nils") };
        p.mutate_card(case, &ParticipantId::new(who), CardMutation::new(Board::Resource, "Values", CardAction::Update).card(card)).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let mut store = WarehouseStore::open_fresh(dir.path()).unwrap();
    let stats = run(p.journal(), &p.catalog(), Some(&registry), &mut store, &options(0, 5)).unwrap();
    assert_eq!(stats.extracted, p.journal().len() as u64);
    assert_eq!(stats.loaded, stats.extracted);
    assert_eq!(stats.batches, (p.journal().len() as u64).div_ceil(5));
    // Five complete years of ten figures plus the registration fact.
    assert_eq!(stats.registry_events, 51);
    assert_eq!(store.warehouse().records_of_source(RecordSource::Registry).count(), 51);

    let again = run(p.journal(), &p.catalog(), Some(&registry), &mut store, &options(0, 5)).unwrap();
    assert_eq!((again.extracted, again.loaded, again.purged), (0, 0, 0));

    // Coalescing and consent are both accounted for.
    p.set_consent(linked, false).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut store = WarehouseStore::open_fresh(dir.path()).unwrap();
    let stats = run(p.journal(), &p.catalog(), Some(&registry), &mut store, &options(30, 7)).unwrap();
    assert!(stats.coalesced_away > 0);
    assert!(stats.skipped_consent > 0);
    assert_eq!(stats.extracted - stats.coalesced_away - stats.skipped_consent - stats.skipped_orphan, stats.loaded);
    assert_eq!(store.warehouse().records_of_source(RecordSource::Journal).count() as u64, stats.loaded);
    assert!(!store.warehouse().contains_case(linked));
    assert_eq!(stats.registry_events, 0);
}

#[test]
fn opting_out_purges_on_the_next_incremental_run() {
    let registry = fixture_registry();
    let p = Platform::in_memory(clock(), Some(Arc::new(fixture_registry())));
    let linked = case_with(&p, "Havbris", "kari", Some(("Havbris Design AS", "987654321")));
    add_card(&p, linked, "kari", Board::Resource, "Vision");
    let dir = tempfile::tempdir().unwrap();
    let mut store = WarehouseStore::open_fresh(dir.path()).unwrap();
    run(p.journal(), &p.catalog(), Some(&registry), &mut store, &options(0, 10)).unwrap();
    let before = store.warehouse().records_of_case(linked).count() as u64;
    assert!(before > 2);

    p.set_consent(linked, false).unwrap();
    let stats = run(p.journal(), &p.catalog(), Some(&registry), &mut store, &options(0, 10)).unwrap();
    assert_eq!(stats.purged, before);
    assert!(!store.warehouse().contains_case(linked));
}

struct FailingRegistry;

impl RegistrySource for FailingRegistry {
    fn fetch_company(&self, _: &OrgNumber) -> Result<CompanyRecord, RegistryError> {
        Err(RegistryError::Unavailable("connection refused".into()))
    }
    fn fetch_financials(&self, _: &OrgNumber) -> Result<Vec<FinancialYear>, RegistryError> {
        Err(RegistryError::Unavailable("connection refused".into()))
    }
}

#[test]
fn registry_outage_aborts_before_loading() {
    let p = Platform::in_memory(clock(), None);
    let linked = case_with(&p, "Fjordlys", "kari", Some(("Fjordlys Teknologi AS", "915429785")));
    add_card(&p, linked, "kari", Board::Resource, "Vision");
    let dir = tempfile::tempdir().unwrap();
    let mut store = WarehouseStore::open_fresh(dir.path()).unwrap();
    let err = run(p.journal(), &p.catalog(), Some(&FailingRegistry), &mut store, &options(0, 10)).unwrap_err();
    assert!(matches!(err, EtlError::Registry { .. }));
    assert_eq!(store.checkpoint().watermark, 0);
    assert!(store.warehouse().is_empty());
}

#[test]
fn companies_missing_from_the_registry_still_load() {
    let docs: Vec<FixtureDocument> = Vec::new();
    let registry = FixtureRegistry::new(docs);
    let p = Platform::in_memory(clock(), None);
    let linked = case_with(&p, "Abroad", "kari", Some(("Abroad Ltd", "123456789")));
    add_card(&p, linked, "kari", Board::Resource, "Vision");
    let dir = tempfile::tempdir().unwrap();
    let mut store = WarehouseStore::open_fresh(dir.path()).unwrap();
    let stats = run(p.journal(), &p.catalog(), Some(&registry), &mut store, &options(0, 10)).unwrap();
    assert_eq!((stats.loaded, stats.registry_events), (2, 0));
    let row = store.warehouse().records().next().unwrap().to_row();
    assert_eq!(row["company_name"], json!("Abroad Ltd"));
    assert_eq!(row["nace_code"], Value::Null);
}

#[test]
fn events_of_unknown_cases_are_skipped() {
    let p = Platform::in_memory(clock(), None);
    let case = case_with(&p, "Known", "kari", None);
    add_card(&p, case, "kari", Board::Resource, "Vision");
    let mut catalog = p.catalog();
    catalog.cases.clear();
    let dir = tempfile::tempdir().unwrap();
    let mut store = WarehouseStore::open_fresh(dir.path()).unwrap();
    let stats = run(p.journal(), &catalog, None, &mut store, &options(0, 10)).unwrap();
    assert_eq!((stats.skipped_orphan, stats.loaded), (2, 0));
    assert_eq!(stats.watermark, 2);
}

#[test]
fn only_one_run_holds_the_warehouse() {
    let dir = tempfile::tempdir().unwrap();
    let _held = WarehouseStore::open(dir.path()).unwrap();
    assert!(matches!(WarehouseStore::open(dir.path()), Err(WarehouseError::Locked(_))));
}

#[test]
fn config_driven_runs_report_status() {
    let dir = tempfile::tempdir().unwrap();
    let journal_path = dir.path().join("journal.ndjson");
    let p = Platform::open(&journal_path, clock(), None).unwrap();
    let case = case_with(&p, "Durable", "kari", Some(("Nordvind Mat AS", "912345678")));
    add_card(&p, case, "kari", Board::Resource, "Vision");
    drop(p);

    let mut config = EtlConfig::new(&journal_path, dir.path().join("warehouse"));
    config.registry_endpoint = Some(RegistryEndpoint::Fixture(FIXTURE.into()));
    let registry = fixture_registry();
    let stats = run_with_config(&config, Some(&registry), false).unwrap();
    assert!(stats.completed);
    let st = status(&config).unwrap();
    assert_eq!((st.watermark, st.journal_events, st.pending, st.journal_records), (2, 2, 0, 2));
    assert!(st.registry_records > 0);

    let rebuilt = run_with_config(&config, Some(&registry), true).unwrap();
    assert_eq!(rebuilt.loaded, 2);
}
