//! The platform service: cases, participants, boards and cards, customer
//! tests, forecasts and the overview. Every mutation goes through the journal.

mod catalog;
mod compute;
mod service;

pub use catalog::{catalog_path_for, CaseCatalog, CaseRecord, CompanyLink, LinkVerification};
pub use compute::{
    compute_market_size, compute_overview, score_responses, EndOfMonth, MarketEstimate, MarketSize, ObjectiveItem,
    Overview, PnlMonth, TaskItem, TestOutcome, TestResponse,
};
pub use service::{CardAction, CardMutation, NewCase, NewCompanyLink, ObjectiveInput, Platform, RollOutcome};

use crate::domain::{
    Board, CardId, CaseId, DomainError, ObjectiveCategory, ObjectiveType, ParticipantId, PayloadError, TaskStatus,
};
use crate::journal::JournalError;
use crate::time::YearMonth;

#[derive(Debug, thiserror::Error)]
pub enum PlatformError {
    #[error("invalid case settings: {0}")]
    InvalidSettings(String),
    #[error("unknown case {0}")]
    UnknownCase(CaseId),
    #[error("board {board:?} has no box named {box_name:?}")]
    UnknownBox { board: Board, box_name: String },
    #[error("unknown card {0}")]
    UnknownCard(CardId),
    #[error("participant {participant_id} is not part of case {case_id}")]
    ForeignParticipant { case_id: CaseId, participant_id: ParticipantId },
    #[error("{0}")]
    LifecycleViolation(String),
    #[error("{0}")]
    CategoryMismatch(String),
    #[error("task cannot move from {from:?} to {to:?}")]
    IllegalTransition { from: TaskStatus, to: TaskStatus },
    #[error("{objective_type:?} is not a {objective_category:?} objective")]
    TypeCategoryMismatch {
        objective_category: ObjectiveCategory,
        objective_type: ObjectiveType,
    },
    #[error("month {month} is outside the case period {start}..{end}")]
    MonthOutsidePeriod { month: YearMonth, start: YearMonth, end: YearMonth },
    #[error("no ratings in the test responses")]
    EmptyResponses,
    #[error("rating {rating} for {item:?} is outside 1..=7")]
    RatingOutOfRange { item: String, rating: u8 },
    #[error("invalid market estimate: {0}")]
    InvalidEstimate(String),
    #[error("case {0} has no company link")]
    NoCompanyLink(CaseId),
    #[error("a gap board holds at most three competitors, this would make {count}")]
    TooManyCompetitors { count: usize },
    #[error("invalid payload: {0}")]
    InvalidPayload(String),
    #[error("invalid organization number: {0}")]
    InvalidOrgNumber(String),
    #[error("category {0} is not a rating test")]
    InvalidTestType(u8),
    #[error("storage failure: {0}")]
    Storage(String),
}

impl PlatformError {
    /// Stable machine-readable code for API error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            PlatformError::InvalidSettings(_) => "INVALID_SETTINGS",
            PlatformError::UnknownCase(_) => "UNKNOWN_CASE",
            PlatformError::UnknownBox { .. } => "UNKNOWN_BOX",
            PlatformError::UnknownCard(_) => "UNKNOWN_CARD",
            PlatformError::ForeignParticipant { .. } => "FOREIGN_PARTICIPANT",
            PlatformError::LifecycleViolation(_) => "LIFECYCLE_VIOLATION",
            PlatformError::CategoryMismatch(_) => "CATEGORY_MISMATCH",
            PlatformError::IllegalTransition { .. } => "ILLEGAL_TRANSITION",
            PlatformError::TypeCategoryMismatch { .. } => "TYPE_CATEGORY_MISMATCH",
            PlatformError::MonthOutsidePeriod { .. } => "MONTH_OUTSIDE_PERIOD",
            PlatformError::EmptyResponses => "EMPTY_RESPONSES",
            PlatformError::RatingOutOfRange { .. } => "RATING_OUT_OF_RANGE",
            PlatformError::InvalidEstimate(_) => "INVALID_ESTIMATE",
            PlatformError::NoCompanyLink(_) => "NO_COMPANY_LINK",
            PlatformError::TooManyCompetitors { .. } => "TOO_MANY_COMPETITORS",
            PlatformError::InvalidPayload(_) => "INVALID_PAYLOAD",
            PlatformError::InvalidOrgNumber(_) => "INVALID_ORG_NUMBER",
            PlatformError::InvalidTestType(_) => "INVALID_TEST_TYPE",
            PlatformError::Storage(_) => "STORAGE",
        }
    }
}

impl From<JournalError> for PlatformError {
    fn from(e: JournalError) -> Self {
        match e {
            JournalError::LifecycleViolation { .. } => PlatformError::LifecycleViolation(e.to_string()),
            JournalError::CategoryMismatch { .. } => PlatformError::CategoryMismatch(e.to_string()),
            JournalError::ForeignCard { card_id, .. } => PlatformError::UnknownCard(card_id),
            JournalError::Payload(p) => PlatformError::InvalidPayload(p.to_string()),
            JournalError::Io(_) | JournalError::Corrupt { .. } => PlatformError::Storage(e.to_string()),
        }
    }
}

impl From<DomainError> for PlatformError {
    fn from(e: DomainError) -> Self {
        match e {
            DomainError::UnknownBox { board, box_name } => PlatformError::UnknownBox { board, box_name },
            DomainError::InvalidSettings(s) => PlatformError::InvalidSettings(s),
            DomainError::UnknownField { .. } | DomainError::Payload(_) => PlatformError::InvalidPayload(e.to_string()),
        }
    }
}

impl From<PayloadError> for PlatformError {
    fn from(e: PayloadError) -> Self {
        PlatformError::InvalidPayload(e.to_string())
    }
}
