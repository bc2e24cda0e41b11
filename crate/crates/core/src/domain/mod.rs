//! Pure domain types: the 34-category event taxonomy, board/box classification,
//! category payload schemas, business-idea validation and canvas field mapping.

mod board;
mod canvas;
mod case;
mod category;
mod idea;
mod ids;
mod payload;
mod quantity;

pub use board::{classify, Board};
pub use canvas::{map_canvas_field, CanvasField, CanvasMapping, CANVAS_TABLE};
pub use case::{CanvasModel, CaseRole, CaseSettings, Participant, ParticipantType, PERIOD_MONTHS};
pub use category::{ActionType, EventCategory, Source};
pub use idea::{validate_business_idea, BusinessIdea, IdeaComponent, IdeaValidation};
pub use ids::{CardId, CaseId, OrgNumber, OrgNumberError, ParticipantId};
pub use payload::{
    ActualOrForecast, CaseSettingsFields, CategoryPayload, FinancialFields, GapFields, Level,
    MarketSizeFields, ObjectiveCategory, ObjectiveFields, ObjectiveType, ParticipantFields,
    PayloadError, Polarity, Recurrence, RegistrationFields, RegistrationStatus, RiskFields,
    RiskKind, TaskFields, TaskStatus, TestScoreFields,
};
pub use quantity::{Currency, Quantity, QuantityParseError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DomainError {
    #[error("board {board:?} has no box named {box_name:?}")]
    UnknownBox { board: Board, box_name: String },
    #[error("{model:?} has no canvas field named {field:?}")]
    UnknownField { model: CanvasModel, field: String },
    #[error("invalid case settings: {0}")]
    InvalidSettings(String),
    #[error(transparent)]
    Payload(#[from] PayloadError),
}
