use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::domain::{ActionType, CardId, CaseId, CategoryPayload, EventCategory, ParticipantId};
use crate::time::{format_timestamp, parse_timestamp, Timestamp};

/// An event as submitted for append; id and timestamp are assigned by the journal.
#[derive(Debug, Clone, PartialEq)]
pub struct DraftEvent {
    pub case_id: CaseId,
    /// Subject of the event: a card, idea, settings object, participant or test run.
    pub card_id: CardId,
    pub category: EventCategory,
    pub action: ActionType,
    pub participant_id: ParticipantId,
    pub title: String,
    pub description: String,
    pub payload: CategoryPayload,
    pub idea_ref: Option<CardId>,
}

/// An appended, immutable event.
#[derive(Debug, Clone, PartialEq)]
pub struct JournalEvent {
    pub event_id: u64,
    pub case_id: CaseId,
    pub card_id: CardId,
    pub category: EventCategory,
    pub action: ActionType,
    pub participant_id: ParticipantId,
    pub timestamp: Timestamp,
    pub title: String,
    pub description: String,
    pub payload: CategoryPayload,
    pub idea_ref: Option<CardId>,
}

const COMMON_KEYS: [&str; 10] = [
    "case_id",
    "event_id",
    "timestamp",
    "event_category",
    "action_type",
    "case_participant",
    "event_title",
    "event_description",
    "card_id",
    "idea_ref",
];

impl JournalEvent {
    pub fn from_draft(draft: DraftEvent, event_id: u64, timestamp: Timestamp) -> Self {
        Self {
            event_id,
            case_id: draft.case_id,
            card_id: draft.card_id,
            category: draft.category,
            action: draft.action,
            participant_id: draft.participant_id,
            timestamp,
            title: draft.title,
            description: draft.description,
            payload: draft.payload,
            idea_ref: draft.idea_ref,
        }
    }

    /// Flat field map: common fields first, then the category payload fields.
    pub fn to_map(&self) -> Map<String, Value> {
        let mut map = Map::new();
        map.insert("case_id".into(), self.case_id.0.into());
        map.insert("event_id".into(), self.event_id.into());
        map.insert("timestamp".into(), format_timestamp(&self.timestamp).into());
        map.insert("event_category".into(), self.category.id().into());
        map.insert("action_type".into(), self.action.as_str().into());
        map.insert("case_participant".into(), self.participant_id.as_str().into());
        map.insert("event_title".into(), self.title.clone().into());
        map.insert("event_description".into(), self.description.clone().into());
        map.insert("card_id".into(), self.card_id.as_str().into());
        map.insert(
            "idea_ref".into(),
            self.idea_ref.as_ref().map_or(Value::Null, |i| i.as_str().into()),
        );
        map.extend(self.payload.to_fields());
        map
    }

    pub fn from_map(mut map: Map<String, Value>) -> Result<Self, String> {
        fn take(map: &mut Map<String, Value>, key: &str) -> Result<Value, String> {
            map.remove(key).ok_or_else(|| format!("missing field {key:?}"))
        }
        fn string(v: Value, key: &str) -> Result<String, String> {
            match v {
                Value::String(s) => Ok(s),
                other => Err(format!("field {key:?} must be a string, got {other}")),
            }
        }
        fn uint(v: Value, key: &str) -> Result<u64, String> {
            v.as_u64().ok_or_else(|| format!("field {key:?} must be an unsigned integer"))
        }

        let case_id = CaseId(uint(take(&mut map, "case_id")?, "case_id")?);
        let event_id = uint(take(&mut map, "event_id")?, "event_id")?;
        let ts_raw = string(take(&mut map, "timestamp")?, "timestamp")?;
        let timestamp = parse_timestamp(&ts_raw).map_err(|e| format!("bad timestamp {ts_raw:?}: {e}"))?;
        let cat_id = uint(take(&mut map, "event_category")?, "event_category")?;
        let category = u8::try_from(cat_id)
            .ok()
            .and_then(EventCategory::from_id)
            .ok_or_else(|| format!("unknown event category {cat_id}"))?;
        let action: ActionType = string(take(&mut map, "action_type")?, "action_type")?.parse()?;
        let participant_id = ParticipantId(string(take(&mut map, "case_participant")?, "case_participant")?);
        let title = string(take(&mut map, "event_title")?, "event_title")?;
        let description = string(take(&mut map, "event_description")?, "event_description")?;
        let card_id = CardId(string(take(&mut map, "card_id")?, "card_id")?);
        let idea_ref = match take(&mut map, "idea_ref")? {
            Value::Null => None,
            v => Some(CardId(string(v, "idea_ref")?)),
        };
        let payload = CategoryPayload::from_fields(category, &map).map_err(|e| e.to_string())?;
        Ok(Self {
            event_id,
            case_id,
            card_id,
            category,
            action,
            participant_id,
            timestamp,
            title,
            description,
            payload,
            idea_ref,
        })
    }

    pub fn to_line(&self) -> String {
        Value::Object(self.to_map()).to_string()
    }

    pub fn from_line(line: &str) -> Result<Self, String> {
        match serde_json::from_str(line).map_err(|e| e.to_string())? {
            Value::Object(map) => Self::from_map(map),
            _ => Err("journal line is not an object".into()),
        }
    }

    pub fn is_common_key(key: &str) -> bool {
        COMMON_KEYS.contains(&key)
    }
}

impl Serialize for JournalEvent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_map().serialize(s)
    }
}

impl<'de> Deserialize<'de> for JournalEvent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let map = Map::deserialize(d)?;
        JournalEvent::from_map(map).map_err(serde::de::Error::custom)
    }
}
