use std::collections::HashMap;

use crate::domain::{ActionType, CardId};
use crate::journal::JournalEvent;
use crate::time::Timestamp;

/// Result of coalescing with a record of which event absorbed which.
#[derive(Debug, Clone, PartialEq)]
pub struct Coalesced {
    pub events: Vec<JournalEvent>,
    /// (absorbed event id, surviving event id)
    pub absorbed: Vec<(u64, u64)>,
}

/// Merges rapid edits: an Update that follows the previous event on the same
/// card, by the same participant, within `window_seconds` is folded in. A
/// Create keeps its id and timestamp and takes the Update's content; of two
/// Updates the later one survives. A window of 0 changes nothing.
pub fn coalesce(batch: &[JournalEvent], window_seconds: u64) -> Vec<JournalEvent> {
    coalesce_traced(batch, window_seconds).events
}

pub fn coalesce_traced(batch: &[JournalEvent], window_seconds: u64) -> Coalesced {
    if window_seconds == 0 {
        return Coalesced {
            events: batch.to_vec(),
            absorbed: Vec::new(),
        };
    }
    let window = i64::try_from(window_seconds).unwrap_or(i64::MAX);
    let mut out: Vec<Option<JournalEvent>> = Vec::with_capacity(batch.len());
    // card → (slot of its latest surviving event, timestamp of its latest original event)
    let mut latest: HashMap<&CardId, (usize, Timestamp)> = HashMap::new();
    let mut absorbed = Vec::new();

    for event in batch {
        let mergeable = latest.get(&event.card_id).and_then(|&(slot, last_ts)| {
            let prev = out[slot].as_ref()?;
            let in_window = (event.timestamp - last_ts).num_seconds() <= window;
            let ok = event.action == ActionType::Update
                && matches!(prev.action, ActionType::Create | ActionType::Update)
                && prev.participant_id == event.participant_id
                && in_window;
            ok.then_some(slot)
        });
        match mergeable {
            Some(slot) => {
                let prev = out[slot].as_mut().expect("checked above");
                if prev.action == ActionType::Create {
                    absorbed.push((event.event_id, prev.event_id));
                    prev.title = event.title.clone();
                    prev.description = event.description.clone();
                    prev.payload = event.payload.clone();
                    prev.idea_ref = event.idea_ref.clone();
                    latest.insert(&event.card_id, (slot, event.timestamp));
                } else {
                    absorbed.push((prev.event_id, event.event_id));
                    out[slot] = None;
                    out.push(Some(event.clone()));
                    latest.insert(&event.card_id, (out.len() - 1, event.timestamp));
                }
            }
            None => {
                out.push(Some(event.clone()));
                latest.insert(&event.card_id, (out.len() - 1, event.timestamp));
            }
        }
    }
    Coalesced {
        events: out.into_iter().flatten().collect(),
        absorbed,
    }
}
