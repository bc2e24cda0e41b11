use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::domain::{
    classify, validate_business_idea, ActionType, ActualOrForecast, Board, BusinessIdea, CardId, CaseId,
    CaseSettings, CaseSettingsFields, CategoryPayload, EventCategory, IdeaValidation, ObjectiveFields, OrgNumber,
    Participant, ParticipantFields, ParticipantId, Quantity, TaskStatus, TestScoreFields,
};
use crate::journal::{CardSnapshot, CardState, Clock, DraftEvent, Journal, JournalEvent, Lifecycle};
use crate::registry::{RegistryError, RegistrySource, DEFAULT_ORG_NUMBER_LEN};
use crate::time::YearMonth;

use super::catalog::{catalog_path_for, CaseCatalog, CaseRecord, CompanyLink, LinkVerification};
use super::compute::{compute_market_size, compute_overview, score_responses, MarketEstimate, MarketSize, Overview, TestOutcome, TestResponse};
use super::PlatformError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewCompanyLink {
    pub company_name: String,
    pub organization_number: String,
    pub country: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewCase {
    pub title: String,
    pub settings: CaseSettings,
    /// The participant creating the case; becomes its first member.
    pub owner: Participant,
    #[serde(default)]
    pub company: Option<NewCompanyLink>,
    /// Defaults to the current month.
    #[serde(default)]
    pub period_start: Option<YearMonth>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CardAction {
    Create,
    Update,
    Delete,
}

impl From<CardAction> for ActionType {
    fn from(a: CardAction) -> Self {
        match a {
            CardAction::Create => ActionType::Create,
            CardAction::Update => ActionType::Update,
            CardAction::Delete => ActionType::Delete,
        }
    }
}

/// A create, update or delete of one card. `fields` holds the
/// category-specific fields; it is ignored for deletes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardMutation {
    pub board: Board,
    #[serde(rename = "box")]
    pub box_name: String,
    pub action: CardAction,
    /// Required for updates and deletes; generated for creates when absent.
    #[serde(default)]
    pub card_id: Option<CardId>,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub fields: Map<String, Value>,
    #[serde(default)]
    pub idea_ref: Option<CardId>,
}

impl CardMutation {
    pub fn new(board: Board, box_name: impl Into<String>, action: CardAction) -> Self {
        Self {
            board,
            box_name: box_name.into(),
            action,
            card_id: None,
            title: String::new(),
            description: String::new(),
            fields: Map::new(),
            idea_ref: None,
        }
    }

    pub fn card(mut self, card_id: CardId) -> Self {
        self.card_id = Some(card_id);
        self
    }

    pub fn title(mut self, title: impl Into<String>) -> Self {
        self.title = title.into();
        self
    }

    pub fn description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn payload(mut self, payload: &CategoryPayload) -> Self {
        self.fields = payload.to_fields();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveInput {
    /// Updates this objective card when set, otherwise creates one.
    #[serde(default)]
    pub card_id: Option<CardId>,
    pub title: String,
    #[serde(default)]
    pub description: String,
    pub fields: ObjectiveFields,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RollOutcome {
    pub period_start: YearMonth,
    pub period_end: YearMonth,
    pub extensions: u32,
    pub events: Vec<JournalEvent>,
}

/// The platform service over a journal and its case catalog.
pub struct Platform {
    journal: Arc<Journal>,
    catalog: RwLock<CaseCatalog>,
    catalog_path: Option<PathBuf>,
    registry: Option<Arc<dyn RegistrySource>>,
    clock: Arc<dyn Clock>,
}

fn storage(e: impl std::fmt::Display) -> PlatformError {
    PlatformError::Storage(e.to_string())
}

fn same_text(a: &str, b: &str) -> bool {
    a.trim().eq_ignore_ascii_case(b.trim())
}

impl Platform {
    pub fn in_memory(clock: Arc<dyn Clock>, registry: Option<Arc<dyn RegistrySource>>) -> Self {
        Self {
            journal: Arc::new(Journal::in_memory(clock.clone())),
            catalog: RwLock::new(CaseCatalog::default()),
            catalog_path: None,
            registry,
            clock,
        }
    }

    /// Opens (or creates) a durable journal and the catalog stored beside it.
    pub fn open(
        journal_path: impl AsRef<Path>,
        clock: Arc<dyn Clock>,
        registry: Option<Arc<dyn RegistrySource>>,
    ) -> Result<Self, PlatformError> {
        let journal_path = journal_path.as_ref();
        let catalog_path = catalog_path_for(journal_path);
        let journal = Journal::open(journal_path, clock.clone())?;
        let catalog = CaseCatalog::load(&catalog_path).map_err(storage)?;
        Ok(Self {
            journal: Arc::new(journal),
            catalog: RwLock::new(catalog),
            catalog_path: Some(catalog_path),
            registry,
            clock,
        })
    }

    pub fn journal(&self) -> &Arc<Journal> {
        &self.journal
    }

    /// Month of the platform clock.
    pub fn current_month(&self) -> YearMonth {
        YearMonth::of(&self.clock.now())
    }

    pub fn catalog(&self) -> CaseCatalog {
        self.catalog.read().clone()
    }

    pub fn case(&self, case_id: CaseId) -> Result<CaseRecord, PlatformError> {
        self.catalog
            .read()
            .get(case_id)
            .cloned()
            .ok_or(PlatformError::UnknownCase(case_id))
    }

    pub fn list_cases(&self) -> Vec<CaseRecord> {
        self.catalog.read().cases.values().cloned().collect()
    }

    /// Live cards of a case, ordered by card id.
    pub fn live_cards(&self, case_id: CaseId) -> Result<Vec<CardSnapshot>, PlatformError> {
        self.case(case_id)?;
        Ok(self
            .journal
            .cards_of_case(case_id)
            .into_iter()
            .filter(|c| c.lifecycle == Lifecycle::Live)
            .collect())
    }

    /// Runs `f` on a copy of the case under the catalog write lock and keeps
    /// the copy only when `f` succeeds.
    fn with_case<T>(
        &self,
        case_id: CaseId,
        f: impl FnOnce(&mut CaseRecord, &Journal) -> Result<T, PlatformError>,
    ) -> Result<T, PlatformError> {
        let mut catalog = self.catalog.write();
        let mut case = catalog.get(case_id).cloned().ok_or(PlatformError::UnknownCase(case_id))?;
        let out = f(&mut case, &self.journal)?;
        if catalog.get(case_id) != Some(&case) {
            catalog.insert(case);
            self.persist(&catalog)?;
        }
        Ok(out)
    }

    fn persist(&self, catalog: &CaseCatalog) -> Result<(), PlatformError> {
        match &self.catalog_path {
            Some(path) => catalog.save(path).map_err(storage),
            None => Ok(()),
        }
    }

    fn parse_org(&self, raw: &str) -> Result<OrgNumber, PlatformError> {
        let parsed = match &self.registry {
            Some(registry) => registry.parse_org_number(raw).map_err(|e| e.to_string()),
            None => OrgNumber::parse_with_len(raw, DEFAULT_ORG_NUMBER_LEN).map_err(|e| e.to_string()),
        };
        parsed.map_err(PlatformError::InvalidOrgNumber)
    }

    fn verify_link(&self, link: &NewCompanyLink, org: &OrgNumber) -> LinkVerification {
        let Some(registry) = &self.registry else {
            return LinkVerification::Unchecked;
        };
        match registry.fetch_company(org) {
            Ok(company) if same_text(&company.company_name, &link.company_name) && same_text(&company.country, &link.country) => {
                LinkVerification::Verified
            }
            Ok(_) => LinkVerification::Mismatch,
            Err(RegistryError::NotFound(_)) => LinkVerification::NotInRegistry,
            Err(e) => {
                log::warn!("could not verify organization {org}: {e}");
                LinkVerification::Unchecked
            }
        }
    }

    pub fn create_case(&self, new: NewCase) -> Result<(CaseRecord, JournalEvent), PlatformError> {
        new.settings.validate()?;
        let company_link = match &new.company {
            Some(link) => {
                let org = self.parse_org(&link.organization_number)?;
                let verification = self.verify_link(link, &org);
                Some(CompanyLink {
                    company_name: link.company_name.clone(),
                    organization_number: org,
                    country: link.country.clone(),
                    consent: true,
                    verification,
                })
            }
            None => None,
        };
        let mut catalog = self.catalog.write();
        let case_id = catalog.allocate_case_id();
        let start = new.period_start.unwrap_or_else(|| self.current_month());
        let mut case = CaseRecord::new(case_id, new.title, new.settings, new.owner, start);
        case.company_link = company_link;
        let event = self.journal.append(DraftEvent {
            case_id,
            card_id: case.settings_card.clone(),
            category: EventCategory::CaseSettings,
            action: ActionType::Create,
            participant_id: case.participants[0].participant_id.clone(),
            title: case.title.clone(),
            description: String::new(),
            payload: settings_payload(&case.settings),
            idea_ref: None,
        })?;
        catalog.insert(case.clone());
        self.persist(&catalog)?;
        Ok((case, event))
    }

    pub fn add_participant(
        &self,
        case_id: CaseId,
        actor: &ParticipantId,
        participant: Participant,
    ) -> Result<JournalEvent, PlatformError> {
        self.with_case(case_id, |case, journal| {
            require_member(case, actor)?;
            if case.participant(&participant.participant_id).is_some() {
                return Err(PlatformError::LifecycleViolation(format!(
                    "participant {} already joined case {case_id}",
                    participant.participant_id
                )));
            }
            let event = journal.append(DraftEvent {
                case_id,
                card_id: CaseRecord::participant_card(&participant.participant_id),
                category: EventCategory::Participants,
                action: ActionType::Create,
                participant_id: actor.clone(),
                title: participant.name.clone(),
                description: String::new(),
                payload: CategoryPayload::Participant(ParticipantFields {
                    participant_type: participant.participant_type,
                }),
                idea_ref: None,
            })?;
            case.participants.push(participant);
            Ok(event)
        })
    }

    pub fn remove_participant(
        &self,
        case_id: CaseId,
        actor: &ParticipantId,
        participant_id: &ParticipantId,
    ) -> Result<JournalEvent, PlatformError> {
        self.with_case(case_id, |case, journal| {
            require_member(case, actor)?;
            let card_id = CaseRecord::participant_card(participant_id);
            let snapshot = live_card(journal, case_id, &card_id)?;
            let event = journal.append(DraftEvent {
                case_id,
                card_id,
                category: EventCategory::Participants,
                action: ActionType::Delete,
                participant_id: actor.clone(),
                title: snapshot.title,
                description: snapshot.description,
                payload: snapshot.payload,
                idea_ref: None,
            })?;
            case.removed_participants.insert(participant_id.clone());
            Ok(event)
        })
    }

    pub fn update_settings(
        &self,
        case_id: CaseId,
        actor: &ParticipantId,
        settings: CaseSettings,
    ) -> Result<JournalEvent, PlatformError> {
        settings.validate()?;
        self.with_case(case_id, |case, journal| {
            require_member(case, actor)?;
            case.settings = settings;
            case.reset_period_end();
            journal_settings_update(journal, case, actor).map_err(Into::into)
        })
    }

    pub fn mutate_card(
        &self,
        case_id: CaseId,
        actor: &ParticipantId,
        mutation: CardMutation,
    ) -> Result<JournalEvent, PlatformError> {
        self.with_case(case_id, |case, journal| apply_mutation(case, journal, actor, mutation))
    }

    /// Adds (`link = true`) or removes a contribution, market or distinction
    /// card from a business idea. Journaled as an update of the idea card.
    pub fn link_idea_card(
        &self,
        case_id: CaseId,
        actor: &ParticipantId,
        idea_id: &CardId,
        card_id: &CardId,
        link: bool,
    ) -> Result<JournalEvent, PlatformError> {
        self.with_case(case_id, |case, journal| {
            require_member(case, actor)?;
            let card = live_card(journal, case_id, card_id)?;
            let idea_card = live_card(journal, case_id, idea_id)?;
            let idea = case
                .ideas
                .get_mut(idea_id)
                .ok_or_else(|| PlatformError::UnknownCard(idea_id.clone()))?;
            let set = match card.category {
                EventCategory::KeyContribution => &mut idea.contribution_cards,
                EventCategory::KeyMarket => &mut idea.market_cards,
                EventCategory::Distinction => &mut idea.distinction_cards,
                other => {
                    return Err(PlatformError::CategoryMismatch(format!(
                        "only contribution, market and distinction cards join an idea, not {other}"
                    )))
                }
            };
            if link {
                set.insert(card_id.clone());
            } else {
                set.remove(card_id);
            }
            journal
                .append(DraftEvent {
                    case_id,
                    card_id: idea_id.clone(),
                    category: EventCategory::BusinessIdea,
                    action: ActionType::Update,
                    participant_id: actor.clone(),
                    title: idea_card.title,
                    description: idea_card.description,
                    payload: CategoryPayload::None,
                    idea_ref: None,
                })
                .map_err(Into::into)
        })
    }

    pub fn idea(&self, case_id: CaseId, idea_id: &CardId) -> Result<(BusinessIdea, IdeaValidation), PlatformError> {
        let case = self.case(case_id)?;
        let idea = case
            .ideas
            .get(idea_id)
            .cloned()
            .ok_or_else(|| PlatformError::UnknownCard(idea_id.clone()))?;
        let validation = validate_business_idea(&idea);
        Ok((idea, validation))
    }

    /// Moves a task between Queue, Active and Done. Done is terminal; an
    /// actual cost may be recorded on the way to Done.
    pub fn move_task(
        &self,
        case_id: CaseId,
        actor: &ParticipantId,
        card_id: &CardId,
        to: TaskStatus,
        actual_cost: Option<Quantity>,
    ) -> Result<JournalEvent, PlatformError> {
        self.with_case(case_id, |case, journal| {
            require_member(case, actor)?;
            let card = match journal.card_state(card_id) {
                CardState::Deleted(s) if s.case_id == case_id => {
                    return Err(PlatformError::LifecycleViolation(format!("task {card_id} is deleted")))
                }
                CardState::Live(s) if s.case_id == case_id => s,
                _ => return Err(PlatformError::UnknownCard(card_id.clone())),
            };
            let CategoryPayload::Task(mut task) = card.payload else {
                return Err(PlatformError::CategoryMismatch(format!("card {card_id} is not a task")));
            };
            let from = task.status;
            let legal = matches!(
                (from, to),
                (TaskStatus::Queue, TaskStatus::Active) | (TaskStatus::Active, TaskStatus::Queue) | (TaskStatus::Active, TaskStatus::Done)
            );
            if !legal {
                return Err(PlatformError::IllegalTransition { from, to });
            }
            task.status = to;
            if let Some(cost) = actual_cost {
                if to != TaskStatus::Done {
                    return Err(PlatformError::InvalidPayload("an actual cost is only recorded when a task is done".into()));
                }
                task.value = cost;
                task.actual_vs_forecast = ActualOrForecast::Actual;
            }
            journal
                .append(DraftEvent {
                    case_id,
                    card_id: card_id.clone(),
                    category: EventCategory::Task,
                    action: ActionType::Move,
                    participant_id: actor.clone(),
                    title: card.title,
                    description: card.description,
                    payload: CategoryPayload::Task(task),
                    idea_ref: card.idea_ref,
                })
                .map_err(Into::into)
        })
    }

    pub fn record_objective(
        &self,
        case_id: CaseId,
        actor: &ParticipantId,
        input: ObjectiveInput,
    ) -> Result<JournalEvent, PlatformError> {
        let box_name = Board::objective_box_name(input.fields.objective_category);
        let action = if input.card_id.is_some() { CardAction::Update } else { CardAction::Create };
        let mut mutation = CardMutation::new(Board::Objectives, box_name, action)
            .title(input.title)
            .description(input.description)
            .payload(&CategoryPayload::Objective(input.fields));
        mutation.card_id = input.card_id;
        self.mutate_card(case_id, actor, mutation)
    }

    /// Scores a problem (20) or solution (21) test and journals the result.
    pub fn run_test(
        &self,
        case_id: CaseId,
        actor: &ParticipantId,
        test: EventCategory,
        responses: &[TestResponse],
    ) -> Result<(TestOutcome, JournalEvent), PlatformError> {
        if !matches!(test, EventCategory::ProblemWorthSolving | EventCategory::SolveTheProblem) {
            return Err(PlatformError::InvalidTestType(test.id()));
        }
        let outcome = score_responses(responses)?;
        let payload = CategoryPayload::TestScore(TestScoreFields {
            average_score: outcome.average_score,
            customer_added: outcome.customer_added,
        });
        let mutation = CardMutation::new(Board::CustomerTest, test.name(), CardAction::Create)
            .title(format!("{} ({} interviewees)", test.name(), responses.len()))
            .payload(&payload);
        let event = self.mutate_card(case_id, actor, mutation)?;
        Ok((outcome, event))
    }

    /// Sizes each market and journals one market-size record per market.
    /// Nothing is journaled when any estimate is invalid.
    pub fn run_market_test(
        &self,
        case_id: CaseId,
        actor: &ParticipantId,
        estimates: &[MarketEstimate],
    ) -> Result<Vec<(MarketSize, JournalEvent)>, PlatformError> {
        let sizes = compute_market_size(estimates)?;
        self.with_case(case_id, |case, journal| {
            require_member(case, actor)?;
            let mut out = Vec::with_capacity(sizes.len());
            for (estimate, size) in estimates.iter().zip(sizes) {
                let mutation = CardMutation::new(Board::CustomerTest, EventCategory::MarketBigEnough.name(), CardAction::Create)
                    .title(estimate.market_name.clone())
                    .description(format!("revenue {} to {}", size.revenue_min, size.revenue_max))
                    .payload(&CategoryPayload::MarketSize(estimate.to_fields()));
                let event = apply_mutation(case, journal, actor, mutation)?;
                out.push((size, event));
            }
            Ok(out)
        })
    }

    /// Extends a rolling case by one month per month boundary crossed since
    /// the last roll, journaling one settings update per extension.
    pub fn roll_forecast(
        &self,
        case_id: CaseId,
        actor: &ParticipantId,
        clock_month: YearMonth,
    ) -> Result<RollOutcome, PlatformError> {
        self.with_case(case_id, |case, journal| {
            require_member(case, actor)?;
            let mut events = Vec::new();
            if case.settings.rolling {
                let boundaries = case.last_rolled.months_until(&clock_month).max(0);
                for _ in 0..boundaries {
                    case.extensions += 1;
                    case.reset_period_end();
                    events.push(journal_settings_update(journal, case, actor)?);
                }
                case.last_rolled = case.last_rolled.max(clock_month);
            }
            Ok(RollOutcome {
                period_start: case.period_start,
                period_end: case.period_end,
                extensions: events.len() as u32,
                events,
            })
        })
    }

    pub fn overview(&self, case_id: CaseId, clock_month: YearMonth) -> Result<Overview, PlatformError> {
        let case = self.case(case_id)?;
        let cards = self.live_cards(case_id)?;
        Ok(compute_overview(&case, &cards, clock_month))
    }

    /// Sets the research-consent flag. Takes effect at the next ETL run; the
    /// journal is untouched.
    pub fn set_consent(&self, case_id: CaseId, consent: bool) -> Result<CompanyLink, PlatformError> {
        self.with_case(case_id, |case, _| {
            let link = case
                .company_link
                .as_mut()
                .ok_or(PlatformError::NoCompanyLink(case_id))?;
            link.consent = consent;
            Ok(link.clone())
        })
    }
}

fn settings_payload(settings: &CaseSettings) -> CategoryPayload {
    CategoryPayload::CaseSettings(CaseSettingsFields {
        canvas_model: settings.canvas_model,
        period_months: settings.period_months,
        rolling: settings.rolling,
    })
}

fn journal_settings_update(
    journal: &Journal,
    case: &CaseRecord,
    actor: &ParticipantId,
) -> Result<JournalEvent, crate::journal::JournalError> {
    journal.append(DraftEvent {
        case_id: case.case_id,
        card_id: case.settings_card.clone(),
        category: EventCategory::CaseSettings,
        action: ActionType::Update,
        participant_id: actor.clone(),
        title: case.title.clone(),
        description: format!("period {} to {}", case.period_start, case.period_end),
        payload: settings_payload(&case.settings),
        idea_ref: None,
    })
}

fn require_member(case: &CaseRecord, actor: &ParticipantId) -> Result<(), PlatformError> {
    if case.is_member(actor) {
        Ok(())
    } else {
        Err(PlatformError::ForeignParticipant {
            case_id: case.case_id,
            participant_id: actor.clone(),
        })
    }
}

/// A live card of this case. Cards of other cases are reported as unknown.
fn live_card(journal: &Journal, case_id: CaseId, card_id: &CardId) -> Result<CardSnapshot, PlatformError> {
    match journal.card_state(card_id) {
        CardState::Live(s) if s.case_id == case_id => Ok(s),
        CardState::Deleted(s) if s.case_id == case_id => {
            Err(PlatformError::LifecycleViolation(format!("card {card_id} is deleted")))
        }
        _ => Err(PlatformError::UnknownCard(card_id.clone())),
    }
}

fn check_objective(case: &CaseRecord, box_name: &str, fields: &ObjectiveFields) -> Result<(), PlatformError> {
    if !fields.objective_type.allowed_for(fields.objective_category) {
        return Err(PlatformError::TypeCategoryMismatch {
            objective_category: fields.objective_category,
            objective_type: fields.objective_type,
        });
    }
    if Board::objective_box(box_name) != Some(fields.objective_category) {
        return Err(PlatformError::InvalidPayload(format!(
            "{:?} objectives belong in {:?}",
            fields.objective_category,
            Board::objective_box_name(fields.objective_category)
        )));
    }
    if !case.contains_month(fields.month) {
        return Err(PlatformError::MonthOutsidePeriod {
            month: fields.month,
            start: case.period_start,
            end: case.period_end,
        });
    }
    Ok(())
}

/// Distinct competitors named on the case's gap board once `subject` is
/// written to `card_id`.
fn competitors_after(journal: &Journal, case: &CaseRecord, card_id: &CardId, subject: &str) -> usize {
    let own = case.own_company_name().trim().to_lowercase();
    let mut names: BTreeSet<String> = journal
        .cards_of_case(case.case_id)
        .into_iter()
        .filter(|c| c.lifecycle == Lifecycle::Live && &c.card_id != card_id)
        .filter_map(|c| match c.payload {
            CategoryPayload::Gap(g) => Some(g.subject_company.trim().to_lowercase()),
            _ => None,
        })
        .collect();
    names.insert(subject.trim().to_lowercase());
    names.remove(&own);
    names.len()
}

fn apply_mutation(
    case: &mut CaseRecord,
    journal: &Journal,
    actor: &ParticipantId,
    mutation: CardMutation,
) -> Result<JournalEvent, PlatformError> {
    require_member(case, actor)?;
    let category = classify(mutation.board, &mutation.box_name)?;
    if let Some(idea) = &mutation.idea_ref {
        if !case.ideas.contains_key(idea) {
            return Err(PlatformError::UnknownCard(idea.clone()));
        }
    }
    let case_id = case.case_id;

    if mutation.action == CardAction::Delete {
        let card_id = mutation
            .card_id
            .ok_or_else(|| PlatformError::InvalidPayload("card_id is required to delete".into()))?;
        let snapshot = live_card(journal, case_id, &card_id)?;
        let event = journal.append(DraftEvent {
            case_id,
            card_id: card_id.clone(),
            category,
            action: ActionType::Delete,
            participant_id: actor.clone(),
            title: snapshot.title,
            description: snapshot.description,
            payload: snapshot.payload,
            idea_ref: snapshot.idea_ref,
        })?;
        case.ideas.remove(&card_id);
        for idea in case.ideas.values_mut() {
            idea.contribution_cards.remove(&card_id);
            idea.market_cards.remove(&card_id);
            idea.distinction_cards.remove(&card_id);
        }
        return Ok(event);
    }

    if category == EventCategory::Objectives {
        if let Ok(fields) = serde_json::from_value::<ObjectiveFields>(Value::Object(mutation.fields.clone())) {
            check_objective(case, &mutation.box_name, &fields)?;
        }
    }
    let payload = CategoryPayload::from_fields(category, &mutation.fields)?;

    let (card_id, previous) = match mutation.action {
        CardAction::Create => {
            let card_id = match mutation.card_id {
                Some(id) => id,
                None => case.allocate_card_id(),
            };
            (card_id, None)
        }
        _ => {
            let card_id = mutation
                .card_id
                .ok_or_else(|| PlatformError::InvalidPayload("card_id is required to update".into()))?;
            let snapshot = live_card(journal, case_id, &card_id)?;
            (card_id, Some(snapshot))
        }
    };

    match &payload {
        CategoryPayload::Task(task) => {
            let box_status = Board::task_box(&mutation.box_name);
            match &previous {
                None if box_status != Some(task.status) => {
                    return Err(PlatformError::InvalidPayload(format!(
                        "a {:?} task cannot be created in box {:?}",
                        task.status, mutation.box_name
                    )))
                }
                Some(prev) => {
                    if let CategoryPayload::Task(old) = &prev.payload {
                        if old.status != task.status {
                            return Err(PlatformError::IllegalTransition {
                                from: old.status,
                                to: task.status,
                            });
                        }
                    }
                }
                None => {}
            }
        }
        CategoryPayload::Gap(gap) => {
            let count = competitors_after(journal, case, &card_id, &gap.subject_company);
            if count > 3 {
                return Err(PlatformError::TooManyCompetitors { count });
            }
        }
        _ => {}
    }

    let event = journal.append(DraftEvent {
        case_id,
        card_id: card_id.clone(),
        category,
        action: mutation.action.into(),
        participant_id: actor.clone(),
        title: mutation.title.clone(),
        description: mutation.description,
        payload,
        idea_ref: mutation.idea_ref,
    })?;
    if category == EventCategory::BusinessIdea {
        case.ideas
            .entry(card_id.clone())
            .and_modify(|i| i.title = mutation.title.clone())
            .or_insert_with(|| BusinessIdea::new(card_id, mutation.title));
    }
    Ok(event)
}
