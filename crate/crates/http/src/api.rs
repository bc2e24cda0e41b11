use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use edw_core::domain::{
    BusinessIdea, CaseSettings, IdeaValidation, Participant, Quantity, TaskStatus,
};
use edw_core::journal::{CardSnapshot, Lifecycle};
use edw_core::platform::{
    CardAction, CardMutation, CaseRecord, MarketEstimate, NewCase, ObjectiveInput, Platform, PlatformError,
    TestResponse,
};
use edw_core::time::{format_timestamp, YearMonth};
use edw_core::{CardId, CaseId, EventCategory, JournalEvent, ParticipantId};

use crate::error::ApiError;

type Shared = Arc<Platform>;

/// JSON body extractor whose rejections use the `{code, message}` shape.
struct Body<T>(T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let bytes = Bytes::from_request(req, state)
            .await
            .map_err(|e| ApiError::malformed(e.to_string()))?;
        serde_json::from_slice(&bytes)
            .map(Body)
            .map_err(|e| ApiError::malformed(format!("invalid request body: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateCaseResponse {
    pub case: CaseRecord,
    pub event: JournalEvent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingsRequest {
    pub participant_id: ParticipantId,
    pub settings: CaseSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantRequest {
    pub participant_id: ParticipantId,
    pub participant: Participant,
}

/// A card mutation plus the acting participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardRequest {
    pub participant_id: ParticipantId,
    #[serde(flatten)]
    pub mutation: CardMutation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveRequest {
    pub participant_id: ParticipantId,
    pub to: TaskStatus,
    #[serde(default)]
    pub actual_cost: Option<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveRequest {
    pub participant_id: ParticipantId,
    #[serde(flatten)]
    pub objective: ObjectiveInput,
}

/// `test_type` is the event category id: 20 and 21 take `responses`, 22
/// takes `estimates`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRequest {
    pub participant_id: ParticipantId,
    pub test_type: u8,
    #[serde(default)]
    pub responses: Vec<TestResponse>,
    #[serde(default)]
    pub estimates: Vec<MarketEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdeaLinkRequest {
    pub participant_id: ParticipantId,
    pub card_id: CardId,
    pub link: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdeaView {
    pub idea: BusinessIdea,
    pub validation: IdeaValidation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollRequest {
    pub participant_id: ParticipantId,
    /// Defaults to the server's current month.
    #[serde(default)]
    pub month: Option<YearMonth>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsentRequest {
    pub consent: bool,
}

/// Current state of a live card.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardView {
    pub card_id: CardId,
    pub case_id: CaseId,
    pub category: EventCategory,
    pub category_name: String,
    pub lifecycle: Lifecycle,
    pub title: String,
    pub description: String,
    pub fields: Map<String, Value>,
    pub idea_ref: Option<CardId>,
    pub last_event_id: u64,
    pub last_participant: ParticipantId,
    pub last_timestamp: String,
}

impl From<CardSnapshot> for CardView {
    fn from(c: CardSnapshot) -> Self {
        Self {
            card_id: c.card_id,
            case_id: c.case_id,
            category: c.category,
            category_name: c.category.name().to_string(),
            lifecycle: c.lifecycle,
            title: c.title,
            description: c.description,
            fields: c.payload.to_fields(),
            idea_ref: c.idea_ref,
            last_event_id: c.last_event_id,
            last_participant: c.last_participant,
            last_timestamp: format_timestamp(&c.last_timestamp),
        }
    }
}

#[derive(Debug, Deserialize)]
struct MonthQuery {
    month: Option<String>,
}

#[derive(Debug, Deserialize)]
struct SinceQuery {
    since: Option<u64>,
}

/// Routes of the platform API over a shared platform.
pub fn platform_router(platform: Arc<Platform>) -> Router {
    Router::new()
        .route("/cases", get(list_cases).post(create_case))
        .route("/cases/{case}", get(get_case))
        .route("/cases/{case}/settings", put(update_settings))
        .route("/cases/{case}/participants", post(add_participant))
        .route("/cases/{case}/cards", get(list_cards).post(mutate_card))
        .route("/cases/{case}/events", get(case_events))
        .route("/cases/{case}/tasks/{card}/move", post(move_task))
        .route("/cases/{case}/objectives", post(record_objective))
        .route("/cases/{case}/tests", post(run_test))
        .route("/cases/{case}/ideas/{idea}", get(get_idea))
        .route("/cases/{case}/ideas/{idea}/links", post(link_idea))
        .route("/cases/{case}/roll", post(roll))
        .route("/cases/{case}/overview", get(overview))
        .route("/cases/{case}/consent", put(set_consent))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "NOT_FOUND", "no such resource") })
        .with_state(platform)
}

fn case_id(raw: &str) -> Result<CaseId, ApiError> {
    raw.parse::<u64>()
        .map(CaseId)
        .map_err(|_| ApiError::malformed(format!("case id {raw:?} is not a number")))
}

/// Platform calls may block on the journal file or a registry lookup.
async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, PlatformError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(ApiError::from)
}

fn ok<T: Serialize>(value: T) -> Response {
    Json(value).into_response()
}

fn created<T: Serialize>(value: T) -> Response {
    (StatusCode::CREATED, Json(value)).into_response()
}

async fn list_cases(State(p): State<Shared>) -> Response {
    ok(p.list_cases())
}

async fn create_case(State(p): State<Shared>, Body(new): Body<NewCase>) -> Result<Response, ApiError> {
    let (case, event) = blocking(move || p.create_case(new)).await?;
    Ok(created(CreateCaseResponse { case, event }))
}

async fn get_case(State(p): State<Shared>, Path(case): Path<String>) -> Result<Response, ApiError> {
    Ok(ok(p.case(case_id(&case)?)?))
}

async fn update_settings(
    State(p): State<Shared>,
    Path(case): Path<String>,
    Body(req): Body<SettingsRequest>,
) -> Result<Response, ApiError> {
    let case = case_id(&case)?;
    Ok(ok(blocking(move || p.update_settings(case, &req.participant_id, req.settings)).await?))
}

async fn add_participant(
    State(p): State<Shared>,
    Path(case): Path<String>,
    Body(req): Body<ParticipantRequest>,
) -> Result<Response, ApiError> {
    let case = case_id(&case)?;
    Ok(created(blocking(move || p.add_participant(case, &req.participant_id, req.participant)).await?))
}

async fn list_cards(State(p): State<Shared>, Path(case): Path<String>) -> Result<Response, ApiError> {
    let cards = p.live_cards(case_id(&case)?)?;
    Ok(ok(cards.into_iter().map(CardView::from).collect::<Vec<_>>()))
}

async fn mutate_card(
    State(p): State<Shared>,
    Path(case): Path<String>,
    Body(req): Body<CardRequest>,
) -> Result<Response, ApiError> {
    let case = case_id(&case)?;
    let creating = req.mutation.action == CardAction::Create;
    let event = blocking(move || p.mutate_card(case, &req.participant_id, req.mutation)).await?;
    Ok(if creating { created(event) } else { ok(event) })
}

async fn case_events(
    State(p): State<Shared>,
    Path(case): Path<String>,
    Query(q): Query<SinceQuery>,
) -> Result<Response, ApiError> {
    let case = case_id(&case)?;
    p.case(case)?;
    let since = q.since.unwrap_or(0);
    let events: Vec<JournalEvent> = p
        .journal()
        .events()
        .iter()
        .filter(|e| e.case_id == case && e.event_id > since)
        .map(|e| (**e).clone())
        .collect();
    Ok(ok(events))
}

async fn move_task(
    State(p): State<Shared>,
    Path((case, card)): Path<(String, String)>,
    Body(req): Body<MoveRequest>,
) -> Result<Response, ApiError> {
    let case = case_id(&case)?;
    let card = CardId::new(card);
    Ok(ok(blocking(move || p.move_task(case, &req.participant_id, &card, req.to, req.actual_cost)).await?))
}

async fn record_objective(
    State(p): State<Shared>,
    Path(case): Path<String>,
    Body(req): Body<ObjectiveRequest>,
) -> Result<Response, ApiError> {
    let case = case_id(&case)?;
    let creating = req.objective.card_id.is_none();
    let event = blocking(move || p.record_objective(case, &req.participant_id, req.objective)).await?;
    Ok(if creating { created(event) } else { ok(event) })
}

async fn run_test(
    State(p): State<Shared>,
    Path(case): Path<String>,
    Body(req): Body<TestRequest>,
) -> Result<Response, ApiError> {
    let case = case_id(&case)?;
    let Some(test) = EventCategory::from_id(req.test_type) else {
        return Err(PlatformError::InvalidTestType(req.test_type).into());
    };
    if test == EventCategory::MarketBigEnough {
        let results = blocking(move || p.run_market_test(case, &req.participant_id, &req.estimates)).await?;
        let results: Vec<Value> = results
            .into_iter()
            .map(|(size, event)| json!({ "market_size": size, "event": event }))
            .collect();
        return Ok(created(json!({ "results": results })));
    }
    let (outcome, event) = blocking(move || p.run_test(case, &req.participant_id, test, &req.responses)).await?;
    Ok(created(json!({ "outcome": outcome, "event": event })))
}

async fn get_idea(
    State(p): State<Shared>,
    Path((case, idea)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let (idea, validation) = p.idea(case_id(&case)?, &CardId::new(idea))?;
    Ok(ok(IdeaView { idea, validation }))
}

async fn link_idea(
    State(p): State<Shared>,
    Path((case, idea)): Path<(String, String)>,
    Body(req): Body<IdeaLinkRequest>,
) -> Result<Response, ApiError> {
    let case = case_id(&case)?;
    let idea = CardId::new(idea);
    Ok(ok(blocking(move || p.link_idea_card(case, &req.participant_id, &idea, &req.card_id, req.link)).await?))
}

async fn roll(
    State(p): State<Shared>,
    Path(case): Path<String>,
    Body(req): Body<RollRequest>,
) -> Result<Response, ApiError> {
    let case = case_id(&case)?;
    let month = req.month.unwrap_or_else(|| p.current_month());
    Ok(ok(blocking(move || p.roll_forecast(case, &req.participant_id, month)).await?))
}

async fn overview(
    State(p): State<Shared>,
    Path(case): Path<String>,
    Query(q): Query<MonthQuery>,
) -> Result<Response, ApiError> {
    let case = case_id(&case)?;
    let month = match q.month {
        Some(raw) => raw
            .parse::<YearMonth>()
            .map_err(|e| ApiError::malformed(format!("month {raw:?}: {e}")))?,
        None => p.current_month(),
    };
    Ok(ok(p.overview(case, month)?))
}

async fn set_consent(
    State(p): State<Shared>,
    Path(case): Path<String>,
    Body(req): Body<ConsentRequest>,
) -> Result<Response, ApiError> {
    let case = case_id(&case)?;
    Ok(ok(blocking(move || p.set_consent(case, req.consent)).await?))
}
