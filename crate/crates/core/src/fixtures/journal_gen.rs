use std::io;
use std::path::Path;
use std::sync::Arc;

use chrono::{Datelike, NaiveTime, TimeDelta};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;

use crate::domain::{
    ActionType, ActualOrForecast, CanvasModel, CardId, CaseId, CaseRole, CaseSettings, CaseSettingsFields,
    CategoryPayload, Currency, EventCategory, GapFields, Level, MarketSizeFields, ObjectiveCategory, ObjectiveFields,
    ObjectiveType, Participant, ParticipantFields, ParticipantId, ParticipantType, Polarity, Quantity, Recurrence,
    RiskFields, RiskKind, TaskFields, TaskStatus, TestScoreFields,
};
use crate::journal::{DraftEvent, Journal, ManualClock};
use crate::domain::PERIOD_MONTHS;
use crate::platform::{catalog_path_for, CaseCatalog, CaseRecord, CompanyLink, LinkVerification};
use crate::time::{Timestamp, YearMonth};

use super::registry_gen::fixture_company_identity;
use super::spec::FixtureSpec;
use super::FixtureError;

/// A generated journal with the case catalog its events refer to.
pub struct GeneratedJournal {
    pub journal: Journal,
    pub catalog: CaseCatalog,
}

impl GeneratedJournal {
    /// Writes the journal to `path` and the catalog beside it.
    pub fn write(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let path = path.as_ref();
        self.journal.write_to(path)?;
        self.catalog.save(catalog_path_for(path))
    }
}

struct CardPlan {
    case: usize,
    category: EventCategory,
    updates: u32,
    moves: u32,
    deleted: bool,
}

struct Planned {
    timestamp: Timestamp,
    card: usize,
    seq: u32,
    action: ActionType,
}

fn random_settings(rng: &mut ChaCha8Rng) -> CaseSettings {
    CaseSettings {
        period_months: *PERIOD_MONTHS.choose(rng).expect("non-empty"),
        rolling: rng.gen_bool(0.5),
        canvas_model: *CanvasModel::ALL.choose(rng).expect("non-empty"),
        template_id: format!("template-{}", rng.gen_range(1..=5)),
        relates_to_whole_company: rng.gen_bool(0.7),
    }
}

fn build_case(rng: &mut ChaCha8Rng, spec: &FixtureSpec, index: u32) -> CaseRecord {
    let id = u64::from(index) + 1;
    let participant = |n: usize, role: CaseRole, rng: &mut ChaCha8Rng| Participant {
        participant_id: ParticipantId::new(format!("p{id}-{n}")),
        name: format!("Participant {n} of case {id}"),
        case_role: role,
        participant_type: if rng.gen_bool(0.8) { ParticipantType::Partner } else { ParticipantType::Employee },
        internal: rng.gen_bool(0.5),
    };
    let owner = participant(1, CaseRole::Entrepreneur, rng);
    let start = YearMonth::new(spec.period.start.year(), spec.period.start.month()).expect("valid month");
    let settings = random_settings(rng);
    let mut case = CaseRecord::new(CaseId(id), format!("Case {id}"), settings, owner, start);
    let extra = rng.gen_range(0..=2);
    for n in 0..extra {
        let role = *[CaseRole::Entrepreneur, CaseRole::Enabler, CaseRole::Educator]
            .choose(rng)
            .expect("non-empty");
        case.participants.push(participant(n + 2, role, rng));
    }
    if index < spec.linked_companies {
        let identity = fixture_company_identity(spec.registry_seed, index as usize);
        case.company_link = Some(CompanyLink {
            company_name: identity.company_name,
            organization_number: identity.organization_number,
            country: identity.country,
            consent: true,
            verification: LinkVerification::Unchecked,
        });
    }
    case
}

fn money(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Quantity {
    Quantity::money(Decimal::from(rng.gen_range(lo..=hi) * 100), Currency::NOK)
}

fn random_month(rng: &mut ChaCha8Rng, case: &CaseRecord) -> YearMonth {
    let span = case.period_start.months_until(&case.period_end);
    case.period_start.plus_months(rng.gen_range(0..=span))
}

fn random_objective(rng: &mut ChaCha8Rng, case: &CaseRecord) -> ObjectiveFields {
    let category = *[ObjectiveCategory::Skills, ObjectiveCategory::ProductMarket, ObjectiveCategory::Money]
        .choose(rng)
        .expect("non-empty");
    let (objective_type, value) = match category {
        ObjectiveCategory::Money => {
            let t = *[ObjectiveType::Revenue, ObjectiveType::Loan, ObjectiveType::Equity, ObjectiveType::Grant]
                .choose(rng)
                .expect("non-empty");
            (t, Some(money(rng, 10, 5000)))
        }
        _ if rng.gen_bool(0.5) => (ObjectiveType::Milestone, None),
        _ => (ObjectiveType::Numerical, Some(Quantity::plain(Decimal::from(rng.gen_range(1..=500))))),
    };
    ObjectiveFields {
        objective_category: category,
        objective_type,
        actual_vs_forecast: if rng.gen_bool(0.3) { ActualOrForecast::Actual } else { ActualOrForecast::Forecast },
        month: random_month(rng, case),
        value,
    }
}

fn random_level(rng: &mut ChaCha8Rng) -> Level {
    *[Level::Low, Level::Medium, Level::High].choose(rng).expect("non-empty")
}

/// A valid payload for `category`. Task status is supplied by the caller.
fn random_payload(rng: &mut ChaCha8Rng, category: EventCategory, case: &CaseRecord, status: TaskStatus) -> CategoryPayload {
    use EventCategory as C;
    match category {
        C::Participants => CategoryPayload::Participant(ParticipantFields {
            participant_type: if rng.gen_bool(0.8) { ParticipantType::Partner } else { ParticipantType::Employee },
        }),
        C::CaseSettings => CategoryPayload::CaseSettings(CaseSettingsFields {
            canvas_model: case.settings.canvas_model,
            period_months: case.settings.period_months,
            rolling: case.settings.rolling,
        }),
        C::StrengthWeaknesses => {
            let subjects = [case.own_company_name(), "Competitor A", "Competitor B", "Competitor C"];
            CategoryPayload::Gap(GapFields {
                polarity: if rng.gen_bool(0.5) { Polarity::Strength } else { Polarity::Weakness },
                subject_company: subjects.choose(rng).expect("non-empty").to_string(),
            })
        }
        C::Objectives => CategoryPayload::Objective(random_objective(rng, case)),
        C::OpportunitiesThreats => CategoryPayload::Risk(RiskFields {
            kind: if rng.gen_bool(0.5) { RiskKind::Opportunity } else { RiskKind::Threat },
            probability: random_level(rng),
            consequence: random_level(rng),
        }),
        C::Task => CategoryPayload::Task(TaskFields {
            cost_group: ["Marketing", "Development", "Travel", "Legal", "Salaries"]
                .choose(rng)
                .expect("non-empty")
                .to_string(),
            month: random_month(rng, case),
            actual_vs_forecast: ActualOrForecast::Forecast,
            value: money(rng, 1, 500),
            status,
            recurrence: if rng.gen_bool(0.2) { Recurrence::Monthly } else { Recurrence::OneOff },
        }),
        C::ProblemWorthSolving | C::SolveTheProblem => {
            let n = rng.gen_range(3..=15u32);
            let sum: u32 = (0..n).map(|_| rng.gen_range(1..=7u32)).sum();
            CategoryPayload::TestScore(TestScoreFields {
                average_score: f64::from(sum) / f64::from(n),
                customer_added: rng.gen_bool(0.3),
            })
        }
        C::MarketBigEnough => {
            let customers_low = rng.gen_range(10..=5000u64);
            let share_low = Decimal::new(rng.gen_range(1..=30), 2);
            let value_low = rng.gen_range(1..=10i64);
            CategoryPayload::MarketSize(MarketSizeFields {
                customers_low,
                customers_high: customers_low + rng.gen_range(0..=5000),
                share_low,
                share_high: share_low + Decimal::new(rng.gen_range(0..=20), 2),
                value_per_customer_low: Quantity::money(Decimal::from(value_low * 100), Currency::NOK),
                value_per_customer_high: Quantity::money(
                    Decimal::from((value_low + rng.gen_range(0..=10)) * 100),
                    Currency::NOK,
                ),
            })
        }
        _ => CategoryPayload::None,
    }
}

fn plan_exact(
    rng: &mut ChaCha8Rng,
    spec: &FixtureSpec,
    counts: &std::collections::BTreeMap<EventCategory, super::spec::ActionCounts>,
) -> Vec<CardPlan> {
    let cases = spec.cases as usize;
    let mut cards: Vec<CardPlan> = Vec::new();
    for (category, c) in counts {
        let first = cards.len();
        let n = c.create as usize;
        cards.extend((0..n).map(|_| CardPlan {
            case: 0,
            category: *category,
            updates: 0,
            moves: 0,
            deleted: false,
        }));
        if n == 0 {
            continue;
        }
        for i in index::sample(rng, n, c.delete as usize) {
            cards[first + i].deleted = true;
        }
        for _ in 0..c.update {
            cards[first + rng.gen_range(0..n)].updates += 1;
        }
        for _ in 0..c.moves {
            cards[first + rng.gen_range(0..n)].moves += 1;
        }
    }
    // Every case gets at least one card while cards last; the rest land uniformly.
    let mut order: Vec<usize> = (0..cards.len()).collect();
    order.shuffle(rng);
    let mut case_order: Vec<usize> = (0..cases).collect();
    case_order.shuffle(rng);
    for (slot, card) in order.into_iter().enumerate() {
        cards[card].case = if slot < cases { case_order[slot] } else { rng.gen_range(0..cases) };
    }
    cards
}

fn plan_random(rng: &mut ChaCha8Rng, spec: &FixtureSpec) -> Vec<CardPlan> {
    let categories: Vec<EventCategory> = (3..=22).filter_map(EventCategory::from_id).collect();
    let mut cards = Vec::new();
    for case in 0..spec.cases as usize {
        for _ in 0..rng.gen_range(1..=8) {
            let category = *categories.choose(rng).expect("non-empty");
            cards.push(CardPlan {
                case,
                category,
                updates: rng.gen_range(0..=3),
                moves: if category == EventCategory::Task { rng.gen_range(0..=2) } else { 0 },
                deleted: rng.gen_bool(0.15),
            });
        }
    }
    cards
}

/// Generates a lifecycle-legal journal. With exact counts, every
/// (category, action) count is met exactly; cards are spread over cases by a
/// seeded draw and each card's events fall at uniform random seconds in the
/// period. The same spec always yields the same journal.
pub fn generate_journal(spec: &FixtureSpec) -> Result<GeneratedJournal, FixtureError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut catalog = CaseCatalog::default();
    let mut cases: Vec<CaseRecord> = (0..spec.cases).map(|i| build_case(&mut rng, spec, i)).collect();

    let plans = match &spec.counts {
        Some(counts) => plan_exact(&mut rng, spec, counts),
        None => plan_random(&mut rng, spec),
    };

    let start = spec.period.start.and_time(NaiveTime::MIN).and_utc();
    let end = spec.period.end.and_hms_opt(23, 59, 59).expect("valid time").and_utc();
    let span = (end - start).num_seconds();
    let mut schedule = Vec::new();
    for (card, plan) in plans.iter().enumerate() {
        let k = 1 + plan.updates + plan.moves + u32::from(plan.deleted);
        let mut stamps: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=span)).collect();
        stamps.sort_unstable();
        let mut middle: Vec<ActionType> = std::iter::repeat_n(ActionType::Update, plan.updates as usize)
            .chain(std::iter::repeat_n(ActionType::Move, plan.moves as usize))
            .collect();
        middle.shuffle(&mut rng);
        let actions = std::iter::once(ActionType::Create)
            .chain(middle)
            .chain(plan.deleted.then_some(ActionType::Delete));
        for (seq, (action, offset)) in actions.zip(stamps).enumerate() {
            schedule.push(Planned {
                timestamp: start + TimeDelta::seconds(offset),
                card,
                seq: seq as u32,
                action,
            });
        }
    }
    schedule.sort_by_key(|p| (p.timestamp, p.card, p.seq));

    let card_ids: Vec<CardId> = plans
        .iter()
        .map(|plan| cases[plan.case].allocate_card_id())
        .collect();
    let mut payloads: Vec<Option<CategoryPayload>> = vec![None; plans.len()];
    let clock = Arc::new(ManualClock::new(start));
    let journal = Journal::in_memory(clock.clone());
    for planned in schedule {
        let plan = &plans[planned.card];
        let case = &cases[plan.case];
        let participant = case
            .participants
            .choose(&mut rng)
            .expect("cases have an owner")
            .participant_id
            .clone();
        let payload = match (planned.action, payloads[planned.card].take()) {
            (ActionType::Create, _) => random_payload(&mut rng, plan.category, case, TaskStatus::Queue),
            (ActionType::Update, Some(CategoryPayload::Task(t))) => random_payload(&mut rng, plan.category, case, t.status),
            (ActionType::Update, _) => random_payload(&mut rng, plan.category, case, TaskStatus::Queue),
            (ActionType::Move, Some(CategoryPayload::Task(mut t))) => {
                t.status = if t.status == TaskStatus::Queue { TaskStatus::Active } else { TaskStatus::Queue };
                CategoryPayload::Task(t)
            }
            (_, Some(previous)) => previous,
            (action, None) => unreachable!("{action} planned before the card's create"),
        };
        payloads[planned.card] = Some(payload.clone());
        clock.set(planned.timestamp);
        journal.append(DraftEvent {
            case_id: case.case_id,
            card_id: card_ids[planned.card].clone(),
            category: plan.category,
            action: planned.action,
            participant_id: participant,
            title: format!("{} {}", plan.category.name(), planned.card + 1),
            description: String::new(),
            payload,
            idea_ref: None,
        })?;
    }
    for case in cases.drain(..) {
        catalog.insert(case);
    }
    Ok(GeneratedJournal { journal, catalog })
}
