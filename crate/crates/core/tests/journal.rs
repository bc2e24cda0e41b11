use std::collections::HashMap;
use std::sync::Arc;
use std::thread;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;

use edw_core::domain::{CardId, CaseId, CategoryPayload, EventCategory, ParticipantId};
use edw_core::fixtures::{generate_journal, FixtureSpec};
use edw_core::journal::{fold_card_states, CardState, DraftEvent, Journal, JournalError, ManualClock, Watermark};
use edw_core::ActionType;

fn clock() -> Arc<ManualClock> {
    Arc::new(ManualClock::new(Utc.with_ymd_and_hms(2017, 2, 1, 8, 0, 0).unwrap()))
}

fn draft(case: u64, card: &str, action: ActionType) -> DraftEvent {
    DraftEvent {
        case_id: CaseId(case),
        card_id: CardId::new(card),
        category: EventCategory::Values,
        action,
        participant_id: ParticipantId::new("p"),
        title: format!("{action} {card}"),
        description: String::new(),
        payload: CategoryPayload::None,
        idea_ref: None,
    }
}

fn action() -> impl Strategy<Value = ActionType> {
    prop_oneof![
        Just(ActionType::Create),
        Just(ActionType::Update),
        Just(ActionType::Delete),
    ]
}

proptest! {
    #[test]
    fn append_accepts_exactly_what_the_state_machine_accepts(ops in prop::collection::vec((0u8..4, action()), 1..60)) {
        #[derive(Clone, Copy, PartialEq, Debug)]
        enum S { Unknown, Live, Deleted }
        let journal = Journal::in_memory(clock());
        let mut oracle: HashMap<u8, S> = HashMap::new();
        for (card, action) in ops {
            let state = *oracle.get(&card).unwrap_or(&S::Unknown);
            let next = match (state, action) {
                (S::Unknown, ActionType::Create) => Some(S::Live),
                (S::Live, ActionType::Update) => Some(S::Live),
                (S::Live, ActionType::Delete) => Some(S::Deleted),
                _ => None,
            };
            let result = journal.append(draft(1, &format!("k{card}"), action));
            prop_assert_eq!(result.is_ok(), next.is_some());
            if let Err(e) = result {
                prop_assert!(matches!(e, JournalError::LifecycleViolation { .. }), "unexpected {:?}", e);
            }
            if let Some(next) = next {
                oracle.insert(card, next);
            }
        }
        for (card, state) in oracle {
            let got = journal.card_state(&CardId::new(format!("k{card}")));
            let same = matches!((state, got), (S::Live, CardState::Live(_)) | (S::Deleted, CardState::Deleted(_)));
            prop_assert!(same);
        }
    }

    #[test]
    fn read_since_partitions_the_journal(n in 0usize..60, limit in 1usize..15) {
        let journal = Journal::in_memory(clock());
        for i in 0..n {
            journal.append(draft(1, &format!("k{i}"), ActionType::Create)).unwrap();
        }
        let mut seen = Vec::new();
        let mut watermark = Watermark(0);
        loop {
            let batch = journal.read_since(watermark, limit);
            prop_assert!(batch.len() <= limit);
            prop_assert_eq!(journal.read_since(watermark, limit).len(), batch.len());
            let Some(last) = batch.last() else { break };
            watermark = Watermark(last.event_id);
            seen.extend(batch.iter().map(|e| e.event_id));
        }
        prop_assert_eq!(seen, (1..=n as u64).collect::<Vec<_>>());
    }
}

#[test]
fn documented_append_examples() {
    let journal = Journal::in_memory(clock());
    let first = journal.append(draft(1, "a", ActionType::Create)).unwrap();
    let second = journal.append(draft(1, "b", ActionType::Create)).unwrap();
    assert_eq!(second.event_id, first.event_id + 1);
    journal.append(draft(1, "a", ActionType::Delete)).unwrap();
    assert!(matches!(
        journal.append(draft(1, "a", ActionType::Update)),
        Err(JournalError::LifecycleViolation { .. })
    ));
    assert!(matches!(
        journal.append(draft(1, "b", ActionType::Move)),
        Err(JournalError::CategoryMismatch { .. })
    ));
    assert!(journal.read_since(Watermark(journal.last_event_id()), 10).is_empty());
    assert!(matches!(journal.card_state(&CardId::new("zzz")), CardState::Unknown));
}

#[test]
fn written_journals_reload_to_the_same_card_states() {
    let generated = generate_journal(&FixtureSpec::random(31, 25)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("journal.ndjson");
    generated.journal.write_to(&path).unwrap();
    let reloaded = Journal::load(&path).unwrap();

    let original = generated.journal.events();
    let loaded = reloaded.events();
    assert_eq!(original.len(), loaded.len());
    assert!(original.iter().zip(&loaded).all(|(a, b)| a == b));
    let fold = |j: &Journal| {
        let events = j.events();
        fold_card_states(events.iter().map(|e| e.as_ref())).unwrap()
    };
    assert_eq!(fold(&generated.journal), fold(&reloaded));
    assert_eq!(fold(&reloaded), fold(&reloaded));
}

#[test]
fn journal_lines_use_second_precision_utc() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j.ndjson");
    let journal = Journal::open(&path, clock()).unwrap();
    journal.append(draft(4, "x", ActionType::Create)).unwrap();
    drop(journal);
    let text = std::fs::read_to_string(&path).unwrap();
    let line: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(line["timestamp"], "2017-02-01T08:00:00Z");
    let keys: Vec<_> = line.as_object().unwrap().keys().take(3).cloned().collect();
    assert_eq!(keys, ["case_id", "event_id", "timestamp"]);
}

#[test]
fn corrupt_journals_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j.ndjson");
    {
        let journal = Journal::open(&path, clock()).unwrap();
        journal.append(draft(1, "x", ActionType::Create)).unwrap();
        journal.append(draft(1, "x", ActionType::Update)).unwrap();
    }
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.swap(0, 1);
    std::fs::write(&path, lines.join("\n")).unwrap();
    assert!(matches!(Journal::load(&path), Err(JournalError::Corrupt { line: 1, .. })));
    std::fs::write(&path, "{not json}\n").unwrap();
    assert!(matches!(Journal::load(&path), Err(JournalError::Corrupt { line: 1, .. })));
}

#[test]
fn concurrent_appends_are_serialized() {
    let journal = Arc::new(Journal::in_memory(clock()));
    let handles: Vec<_> = (0..8)
        .map(|t| {
            let journal = journal.clone();
            thread::spawn(move || {
                for i in 0..200 {
                    journal.append(draft(t % 3, &format!("t{t}-{i}"), ActionType::Create)).unwrap();
                }
            })
        })
        .collect();
    // Readers run while writers append and always see a dense prefix.
    for _ in 0..50 {
        let snapshot = journal.read_since(Watermark(0), usize::MAX);
        assert!(snapshot.iter().enumerate().all(|(i, e)| e.event_id == i as u64 + 1));
    }
    for h in handles {
        h.join().unwrap();
    }
    let events = journal.events();
    assert_eq!(events.len(), 1600);
    assert!(events.windows(2).all(|w| w[0].event_id + 1 == w[1].event_id && w[0].timestamp <= w[1].timestamp));
}

#[test]
fn racing_deletes_have_one_winner() {
    let journal = Arc::new(Journal::in_memory(clock()));
    journal.append(draft(1, "card", ActionType::Create)).unwrap();
    let results: Vec<bool> = (0..8)
        .map(|_| {
            let journal = journal.clone();
            thread::spawn(move || journal.append(draft(1, "card", ActionType::Delete)).is_ok())
        })
        .collect::<Vec<_>>()
        .into_iter()
        .map(|h| h.join().unwrap())
        .collect();
    assert_eq!(results.iter().filter(|ok| **ok).count(), 1);
}
