//! Event-sourced business-development platform and its analytics warehouse.
//!
//! Every change to a case (boards, cards, customer tests, settings) is appended to
//! the [`journal`] as a categorized, timestamped event. The [`etl`] pipeline pulls
//! those events, joins them with case and company context plus registry financials,
//! and loads a single-table time-series [`warehouse`] used for aggregation and
//! success-score analytics.

pub mod domain;
pub mod etl;
pub mod fixtures;
pub mod journal;
pub mod platform;
pub mod registry;
pub mod time;
pub mod warehouse;

pub use domain::{ActionType, CaseId, CardId, EventCategory, ParticipantId};
pub use journal::{Journal, JournalEvent};
