use serde::{Deserialize, Serialize};

use crate::domain::ActionType;

/// Per-card lifecycle. Deleted is terminal: card ids are never resurrected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lifecycle {
    Unknown,
    Live,
    Deleted,
}

impl Lifecycle {
    /// State after applying `action`, or `None` when the action is illegal here.
    pub fn after(self, action: ActionType) -> Option<Lifecycle> {
        use ActionType::*;
        match (self, action) {
            (Lifecycle::Unknown, Create) => Some(Lifecycle::Live),
            (Lifecycle::Live, Update | Move) => Some(Lifecycle::Live),
            (Lifecycle::Live, Delete) => Some(Lifecycle::Deleted),
            _ => None,
        }
    }
}
