//! Append-only, totally ordered journal of platform events.
//!
//! The journal is the single serialization point for card mutations: every
//! append is validated against the card's lifecycle (`Unknown -> Live ->
//! Deleted`), assigned the next event id and stamped by the journal clock,
//! then written as one line to the backing file before it becomes visible.
//!
//! On disk the journal is newline-delimited JSON, one event per line, with the
//! common fields first and the category payload fields after them.

mod clock;
mod event;
mod lifecycle;

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

pub use clock::{Clock, ManualClock, SystemClock};
pub use event::{DraftEvent, JournalEvent};
pub use lifecycle::Lifecycle;

use crate::domain::{ActionType, CardId, CaseId, CategoryPayload, EventCategory, ParticipantId, PayloadError};
use crate::time::Timestamp;

/// Highest event id an ETL consumer has processed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Watermark(pub u64);

#[derive(Debug, thiserror::Error)]
pub enum JournalError {
    #[error("lifecycle violation: {action} on card {card_id} in state {state:?}")]
    LifecycleViolation {
        card_id: CardId,
        state: Lifecycle,
        action: ActionType,
    },
    #[error("category mismatch on card {card_id}: {reason}")]
    CategoryMismatch { card_id: CardId, reason: String },
    #[error("card {card_id} belongs to case {owner}")]
    ForeignCard { card_id: CardId, owner: CaseId },
    #[error(transparent)]
    Payload(#[from] PayloadError),
    #[error("journal i/o: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt journal at line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
}

/// Folded state of one card.
#[derive(Debug, Clone, PartialEq)]
pub struct CardSnapshot {
    pub card_id: CardId,
    pub case_id: CaseId,
    pub category: EventCategory,
    pub lifecycle: Lifecycle,
    pub title: String,
    pub description: String,
    pub payload: CategoryPayload,
    pub idea_ref: Option<CardId>,
    pub last_event_id: u64,
    pub last_participant: ParticipantId,
    pub last_timestamp: Timestamp,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CardState {
    Unknown,
    Live(CardSnapshot),
    Deleted(CardSnapshot),
}

impl CardState {
    pub fn lifecycle(&self) -> Lifecycle {
        match self {
            CardState::Unknown => Lifecycle::Unknown,
            CardState::Live(_) => Lifecycle::Live,
            CardState::Deleted(_) => Lifecycle::Deleted,
        }
    }

    pub fn snapshot(&self) -> Option<&CardSnapshot> {
        match self {
            CardState::Unknown => None,
            CardState::Live(s) | CardState::Deleted(s) => Some(s),
        }
    }
}

/// Checks `event` against the current card state and returns the next state.
fn step(current: Option<&CardSnapshot>, event: &JournalEvent) -> Result<CardSnapshot, JournalError> {
    event.payload.validate(event.category)?;
    if event.action == ActionType::Move && event.category != EventCategory::Task {
        return Err(JournalError::CategoryMismatch {
            card_id: event.card_id.clone(),
            reason: format!("Move is only valid for tasks, not {}", event.category),
        });
    }
    let state = current.map_or(Lifecycle::Unknown, |c| c.lifecycle);
    if let Some(card) = current {
        if card.case_id != event.case_id {
            return Err(JournalError::ForeignCard {
                card_id: event.card_id.clone(),
                owner: card.case_id,
            });
        }
        if card.category != event.category {
            return Err(JournalError::CategoryMismatch {
                card_id: event.card_id.clone(),
                reason: format!("card is {}, event is {}", card.category, event.category),
            });
        }
    }
    let lifecycle = state.after(event.action).ok_or_else(|| JournalError::LifecycleViolation {
        card_id: event.card_id.clone(),
        state,
        action: event.action,
    })?;
    Ok(CardSnapshot {
        card_id: event.card_id.clone(),
        case_id: event.case_id,
        category: event.category,
        lifecycle,
        title: event.title.clone(),
        description: event.description.clone(),
        payload: event.payload.clone(),
        idea_ref: event.idea_ref.clone(),
        last_event_id: event.event_id,
        last_participant: event.participant_id.clone(),
        last_timestamp: event.timestamp,
    })
}

/// Replays an event sequence into card states (last write wins).
pub fn fold_card_states<'a>(
    events: impl IntoIterator<Item = &'a JournalEvent>,
) -> Result<BTreeMap<CardId, CardSnapshot>, JournalError> {
    let mut cards = BTreeMap::new();
    for event in events {
        let next = step(cards.get(&event.card_id), event)?;
        cards.insert(event.card_id.clone(), next);
    }
    Ok(cards)
}

#[derive(Default)]
struct State {
    events: Vec<Arc<JournalEvent>>,
    cards: HashMap<CardId, CardSnapshot>,
    last_timestamp: Option<Timestamp>,
    case_last_timestamp: HashMap<CaseId, Timestamp>,
}

impl State {
    fn next_id(&self) -> u64 {
        self.events.len() as u64 + 1
    }

    /// Validates and applies an already-stamped event.
    fn apply(&mut self, event: JournalEvent) -> Result<Arc<JournalEvent>, JournalError> {
        let next = step(self.cards.get(&event.card_id), &event)?;
        self.commit(event, next)
    }

    fn commit(&mut self, event: JournalEvent, card: CardSnapshot) -> Result<Arc<JournalEvent>, JournalError> {
        self.cards.insert(event.card_id.clone(), card);
        self.last_timestamp = Some(self.last_timestamp.map_or(event.timestamp, |t| t.max(event.timestamp)));
        self.case_last_timestamp.insert(event.case_id, event.timestamp);
        let event = Arc::new(event);
        self.events.push(Arc::clone(&event));
        Ok(event)
    }
}

struct Sink {
    writer: BufWriter<File>,
    sync: bool,
}

pub struct Journal {
    state: RwLock<State>,
    clock: Arc<dyn Clock>,
    sink: Mutex<Option<Sink>>,
    path: Option<PathBuf>,
}

impl std::fmt::Debug for Journal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Journal")
            .field("len", &self.len())
            .field("path", &self.path)
            .finish()
    }
}

impl Journal {
    pub fn in_memory(clock: Arc<dyn Clock>) -> Self {
        Self {
            state: RwLock::new(State::default()),
            clock,
            sink: Mutex::new(None),
            path: None,
        }
    }

    /// Opens (or creates) a durable journal; every append is written and synced
    /// before it is acknowledged.
    pub fn open(path: impl AsRef<Path>, clock: Arc<dyn Clock>) -> Result<Self, JournalError> {
        let path = path.as_ref();
        let state = if path.exists() {
            Self::replay(path)?
        } else {
            State::default()
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            state: RwLock::new(state),
            clock,
            sink: Mutex::new(Some(Sink {
                writer: BufWriter::new(file),
                sync: true,
            })),
            path: Some(path.to_path_buf()),
        })
    }

    /// Loads a journal file for reading only; appends stay in memory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, JournalError> {
        let path = path.as_ref();
        Ok(Self {
            state: RwLock::new(Self::replay(path)?),
            clock: Arc::new(SystemClock),
            sink: Mutex::new(None),
            path: Some(path.to_path_buf()),
        })
    }

    fn replay(path: &Path) -> Result<State, JournalError> {
        let reader = BufReader::new(File::open(path)?);
        let mut state = State::default();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let corrupt = |reason: String| JournalError::Corrupt { line: lineno, reason };
            let event = JournalEvent::from_line(&line).map_err(corrupt)?;
            if event.event_id != state.next_id() {
                return Err(corrupt(format!(
                    "expected event id {}, found {}",
                    state.next_id(),
                    event.event_id
                )));
            }
            if let Some(prev) = state.case_last_timestamp.get(&event.case_id) {
                if event.timestamp < *prev {
                    return Err(corrupt(format!("timestamp goes backwards within case {}", event.case_id)));
                }
            }
            state.apply(event).map_err(|e| corrupt(e.to_string()))?;
        }
        Ok(state)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Validates the draft against its card's lifecycle and appends it.
    pub fn append(&self, draft: DraftEvent) -> Result<JournalEvent, JournalError> {
        let mut state = self.state.write();
        let now = self.clock.now();
        let timestamp = state.last_timestamp.map_or(now, |last| last.max(now));
        let event = JournalEvent::from_draft(draft, state.next_id(), timestamp);
        let card = step(state.cards.get(&event.card_id), &event)?;
        if let Some(sink) = self.sink.lock().as_mut() {
            writeln!(sink.writer, "{}", event.to_line())?;
            sink.writer.flush()?;
            if sink.sync {
                sink.writer.get_ref().sync_data()?;
            }
        }
        let event = state.commit(event, card)?;
        Ok((*event).clone())
    }

    /// Events with id greater than `watermark`, ascending, at most `limit` of them.
    pub fn read_since(&self, watermark: Watermark, limit: usize) -> Vec<Arc<JournalEvent>> {
        let state = self.state.read();
        // Event ids are dense from 1, so id n lives at index n - 1.
        let start = usize::try_from(watermark.0).unwrap_or(usize::MAX).min(state.events.len());
        let end = start.saturating_add(limit).min(state.events.len());
        state.events[start..end].to_vec()
    }

    pub fn events(&self) -> Vec<Arc<JournalEvent>> {
        self.state.read().events.clone()
    }

    pub fn len(&self) -> usize {
        self.state.read().events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn last_event_id(&self) -> u64 {
        self.len() as u64
    }

    pub fn card_state(&self, card_id: &CardId) -> CardState {
        match self.state.read().cards.get(card_id) {
            None => CardState::Unknown,
            Some(s) if s.lifecycle == Lifecycle::Deleted => CardState::Deleted(s.clone()),
            Some(s) => CardState::Live(s.clone()),
        }
    }

    /// All cards ever created in a case, ordered by card id.
    pub fn cards_of_case(&self, case_id: CaseId) -> Vec<CardSnapshot> {
        let state = self.state.read();
        let mut cards: Vec<_> = state.cards.values().filter(|c| c.case_id == case_id).cloned().collect();
        cards.sort_by(|a, b| a.card_id.cmp(&b.card_id));
        cards
    }

    /// Writes the whole journal to `path` atomically.
    pub fn write_to(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let path = path.as_ref();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        let tmp = path.with_extension("tmp");
        {
            let mut writer = BufWriter::new(File::create(&tmp)?);
            for event in self.state.read().events.iter() {
                writeln!(writer, "{}", event.to_line())?;
            }
            writer.flush()?;
            writer.get_ref().sync_all()?;
        }
        fs::rename(tmp, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{
        ActualOrForecast, Currency, Quantity, Recurrence, TaskFields, TaskStatus,
    };
    use crate::time::parse_timestamp;

    fn clock() -> Arc<ManualClock> {
        Arc::new(ManualClock::new(parse_timestamp("2017-02-01T08:00:00Z").unwrap()))
    }

    fn draft(card: &str, category: EventCategory, action: ActionType) -> DraftEvent {
        let payload = match category {
            EventCategory::Task => CategoryPayload::Task(TaskFields {
                cost_group: "Dev".into(),
                month: "2017-02".parse().unwrap(),
                actual_vs_forecast: ActualOrForecast::Forecast,
                value: Quantity::money(1000.into(), Currency::NOK),
                status: TaskStatus::Queue,
                recurrence: Recurrence::OneOff,
            }),
            _ => CategoryPayload::None,
        };
        DraftEvent {
            case_id: CaseId(1),
            card_id: CardId::new(card),
            category,
            action,
            participant_id: ParticipantId::new("p1"),
            title: format!("{action} {card}"),
            description: String::new(),
            payload,
            idea_ref: None,
        }
    }

    #[test]
    fn append_assigns_dense_ids() {
        let journal = Journal::in_memory(clock());
        let a = journal.append(draft("a", EventCategory::Vision, ActionType::Create)).unwrap();
        let b = journal.append(draft("b", EventCategory::Vision, ActionType::Create)).unwrap();
        assert_eq!((a.event_id, b.event_id), (1, 2));
        assert_eq!(journal.len(), 2);
    }

    #[test]
    fn lifecycle_rules() {
        let journal = Journal::in_memory(clock());
        assert!(matches!(
            journal.append(draft("a", EventCategory::Vision, ActionType::Update)),
            Err(JournalError::LifecycleViolation { state: Lifecycle::Unknown, .. })
        ));
        journal.append(draft("a", EventCategory::Vision, ActionType::Create)).unwrap();
        assert!(journal.append(draft("a", EventCategory::Vision, ActionType::Create)).is_err());
        journal.append(draft("a", EventCategory::Vision, ActionType::Delete)).unwrap();
        assert!(matches!(
            journal.append(draft("a", EventCategory::Vision, ActionType::Update)),
            Err(JournalError::LifecycleViolation { state: Lifecycle::Deleted, .. })
        ));
        assert!(journal.append(draft("a", EventCategory::Vision, ActionType::Create)).is_err());
        assert_eq!(journal.len(), 2);
    }

    #[test]
    fn move_only_for_tasks() {
        let journal = Journal::in_memory(clock());
        journal.append(draft("v", EventCategory::Vision, ActionType::Create)).unwrap();
        assert!(matches!(
            journal.append(draft("v", EventCategory::Vision, ActionType::Move)),
            Err(JournalError::CategoryMismatch { .. })
        ));
        journal.append(draft("t", EventCategory::Task, ActionType::Create)).unwrap();
        journal.append(draft("t", EventCategory::Task, ActionType::Move)).unwrap();
    }

    #[test]
    fn card_keeps_its_category_and_case() {
        let journal = Journal::in_memory(clock());
        journal.append(draft("a", EventCategory::Vision, ActionType::Create)).unwrap();
        assert!(matches!(
            journal.append(draft("a", EventCategory::Values, ActionType::Update)),
            Err(JournalError::CategoryMismatch { .. })
        ));
        let mut foreign = draft("a", EventCategory::Vision, ActionType::Update);
        foreign.case_id = CaseId(2);
        assert!(matches!(journal.append(foreign), Err(JournalError::ForeignCard { .. })));
    }

    #[test]
    fn card_state_folds_last_write() {
        let journal = Journal::in_memory(clock());
        assert_eq!(journal.card_state(&CardId::new("t")), CardState::Unknown);
        journal.append(draft("t", EventCategory::Task, ActionType::Create)).unwrap();
        let mut update = draft("t", EventCategory::Task, ActionType::Update);
        if let CategoryPayload::Task(t) = &mut update.payload {
            t.cost_group = "Sales".into();
        }
        journal.append(update.clone()).unwrap();
        match journal.card_state(&CardId::new("t")) {
            CardState::Live(s) => assert_eq!(s.payload, update.payload),
            other => panic!("{other:?}"),
        }
        journal.append(draft("t", EventCategory::Task, ActionType::Delete)).unwrap();
        assert_eq!(journal.card_state(&CardId::new("t")).lifecycle(), Lifecycle::Deleted);
    }

    #[test]
    fn timestamps_never_decrease() {
        let clock = clock();
        let journal = Journal::in_memory(clock.clone());
        let a = journal.append(draft("a", EventCategory::Vision, ActionType::Create)).unwrap();
        clock.advance(-3600);
        let b = journal.append(draft("b", EventCategory::Vision, ActionType::Create)).unwrap();
        assert_eq!(a.timestamp, b.timestamp);
    }

    #[test]
    fn read_since_pages() {
        let journal = Journal::in_memory(clock());
        for i in 0..10 {
            journal.append(draft(&format!("c{i}"), EventCategory::Values, ActionType::Create)).unwrap();
        }
        let ids = |w, l| journal.read_since(Watermark(w), l).iter().map(|e| e.event_id).collect::<Vec<_>>();
        assert_eq!(ids(0, 4), vec![1, 2, 3, 4]);
        assert_eq!(ids(8, 4), vec![9, 10]);
        assert!(ids(10, 4).is_empty());
        assert!(ids(u64::MAX, 4).is_empty());
        assert_eq!(ids(0, 100).len(), 10);
    }

    #[test]
    fn durable_journal_replays() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("journal.ndjson");
        {
            let journal = Journal::open(&path, clock()).unwrap();
            journal.append(draft("t", EventCategory::Task, ActionType::Create)).unwrap();
            journal.append(draft("t", EventCategory::Task, ActionType::Move)).unwrap();
            assert!(journal.append(draft("t", EventCategory::Task, ActionType::Create)).is_err());
        }
        let reopened = Journal::open(&path, clock()).unwrap();
        assert_eq!(reopened.len(), 2);
        let next = reopened.append(draft("t", EventCategory::Task, ActionType::Delete)).unwrap();
        assert_eq!(next.event_id, 3);
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().next().unwrap().starts_with(r#"{"case_id":1,"event_id":1,"timestamp":"2017-02-01T08:00:00Z""#));
    }

    #[test]
    fn replay_rejects_gaps() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("journal.ndjson");
        let journal = Journal::in_memory(clock());
        journal.append(draft("a", EventCategory::Vision, ActionType::Create)).unwrap();
        journal.append(draft("b", EventCategory::Vision, ActionType::Create)).unwrap();
        journal.write_to(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let second = text.lines().nth(1).unwrap();
        fs::write(&path, format!("{second}\n")).unwrap();
        assert!(matches!(Journal::load(&path), Err(JournalError::Corrupt { line: 1, .. })));
    }

    #[test]
    fn line_codec_round_trip() {
        let journal = Journal::in_memory(clock());
        let e = journal.append(draft("t", EventCategory::Task, ActionType::Create)).unwrap();
        assert_eq!(JournalEvent::from_line(&e.to_line()).unwrap(), e);
    }
}
