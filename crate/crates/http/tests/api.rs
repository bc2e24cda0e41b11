use std::sync::Arc;
use std::thread;

use chrono::{TimeZone, Utc};
use reqwest::blocking::Client;
use reqwest::{Method, StatusCode};
use rust_decimal::Decimal;
use serde_json::{json, Value};

use edw_core::domain::{
    ActualOrForecast, Board, CanvasModel, CaseRole, CaseSettings, CategoryPayload, Currency, GapFields, Level,
    ObjectiveCategory, ObjectiveFields, ObjectiveType, Participant, ParticipantType, Polarity, Quantity, Recurrence,
    RiskFields, RiskKind, TaskFields, TaskStatus,
};
use edw_core::journal::ManualClock;
use edw_core::platform::{
    compute_market_size, CardAction, CardMutation, MarketEstimate, NewCase, NewCompanyLink, ObjectiveInput, Platform,
    TestResponse,
};
use edw_core::registry::{FixtureRegistry, RegistrySource};
use edw_core::time::YearMonth;
use edw_core::{CardId, ParticipantId};
use edw_http::{
    platform_router, registry_router, BackgroundServer, CardRequest, CardView, CreateCaseResponse, ErrorBody,
    HttpRegistryClient, ObjectiveRequest, TestRequest,
};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data/registry.ndjson");

struct Api {
    server: BackgroundServer,
    http: Client,
}

impl Api {
    fn start(registry: Option<Arc<dyn RegistrySource>>) -> Self {
        let clock = Arc::new(ManualClock::new(Utc.with_ymd_and_hms(2017, 3, 14, 12, 0, 0).unwrap()));
        let platform = Arc::new(Platform::in_memory(clock, registry));
        Self {
            server: BackgroundServer::start(platform_router(platform)).unwrap(),
            http: Client::new(),
        }
    }

    fn call(&self, method: Method, path: &str, body: Option<Value>) -> (StatusCode, Value) {
        let mut req = self.http.request(method, format!("{}{path}", self.server.url()));
        if let Some(body) = body {
            req = req.header("content-type", "application/json").body(body.to_string());
        }
        let resp = req.send().unwrap();
        let status = resp.status();
        let text = resp.text().unwrap();
        (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
    }

    fn get(&self, path: &str) -> (StatusCode, Value) {
        self.call(Method::GET, path, None)
    }

    fn post(&self, path: &str, body: impl serde::Serialize) -> (StatusCode, Value) {
        self.call(Method::POST, path, Some(serde_json::to_value(body).unwrap()))
    }

    fn put(&self, path: &str, body: impl serde::Serialize) -> (StatusCode, Value) {
        self.call(Method::PUT, path, Some(serde_json::to_value(body).unwrap()))
    }

    fn create_case(&self, company: Option<NewCompanyLink>) -> CreateCaseResponse {
        let (status, body) = self.post("/cases", new_case(company));
        assert_eq!(status, StatusCode::CREATED, "{body}");
        serde_json::from_value(body).unwrap()
    }

    fn card(&self, case: u64, mutation: CardMutation) -> (StatusCode, Value) {
        self.post(
            &format!("/cases/{case}/cards"),
            CardRequest {
                participant_id: ParticipantId::new("liv"),
                mutation,
            },
        )
    }
}

fn expect_error(reply: (StatusCode, Value), status: StatusCode, code: &str) {
    assert_eq!(reply.0, status, "{}", reply.1);
    let body: ErrorBody = serde_json::from_value(reply.1).unwrap();
    assert_eq!(body.code, code);
    assert!(!body.message.is_empty());
}

fn new_case(company: Option<NewCompanyLink>) -> NewCase {
    NewCase {
        title: "Trollfjord Kayaks".into(),
        settings: CaseSettings {
            period_months: 6,
            rolling: false,
            canvas_model: CanvasModel::LeanCanvas,
            template_id: "default".into(),
            relates_to_whole_company: true,
        },
        owner: Participant {
            participant_id: ParticipantId::new("liv"),
            name: "Liv".into(),
            case_role: CaseRole::Entrepreneur,
            participant_type: ParticipantType::Partner,
            internal: false,
        },
        company,
        period_start: None,
    }
}

fn nok(amount: i64) -> Quantity {
    Quantity::money(Decimal::from(amount), Currency::NOK)
}

fn task_payload(status: TaskStatus) -> CategoryPayload {
    CategoryPayload::Task(TaskFields {
        cost_group: "Equipment".into(),
        month: YearMonth::new(2017, 4).unwrap(),
        actual_vs_forecast: ActualOrForecast::Forecast,
        value: nok(12_000),
        status,
        recurrence: Recurrence::OneOff,
    })
}

#[test]
fn cases_are_created_listed_and_fetched() {
    let api = Api::start(None);
    let created = api.create_case(None);
    assert_eq!(created.event.category.id(), 2);
    assert_eq!(created.case.period_start, YearMonth::new(2017, 3).unwrap());
    let id = created.case.case_id.0;

    let (status, list) = api.get("/cases");
    assert_eq!(status, StatusCode::OK);
    assert_eq!(list.as_array().unwrap().len(), 1);
    let (status, one) = api.get(&format!("/cases/{id}"));
    assert_eq!(status, StatusCode::OK);
    assert_eq!(one["title"], json!("Trollfjord Kayaks"));

    let mut bad = new_case(None);
    bad.settings.period_months = 5;
    expect_error(api.post("/cases", bad), StatusCode::UNPROCESSABLE_ENTITY, "INVALID_SETTINGS");
}

#[test]
fn one_event_of_the_box_category_per_board() {
    let api = Api::start(None);
    let id = api.create_case(None).case.case_id.0;
    let cases: Vec<(Board, &str, CategoryPayload)> = vec![
        (Board::Resource, "Vision", CategoryPayload::None),
        (Board::BusinessIdea, "Key Market", CategoryPayload::None),
        (Board::BusinessModel, "How to Sell", CategoryPayload::None),
        (
            Board::Gap,
            "Strength & Weaknesses",
            CategoryPayload::Gap(GapFields {
                polarity: Polarity::Strength,
                subject_company: "Trollfjord Kayaks".into(),
            }),
        ),
        (
            Board::Objectives,
            "Skills Objectives",
            CategoryPayload::Objective(ObjectiveFields {
                objective_category: ObjectiveCategory::Skills,
                objective_type: ObjectiveType::Milestone,
                actual_vs_forecast: ActualOrForecast::Forecast,
                month: YearMonth::new(2017, 5).unwrap(),
                value: None,
            }),
        ),
        (
            Board::Risk,
            "Opportunities & Threats",
            CategoryPayload::Risk(RiskFields {
                kind: RiskKind::Opportunity,
                probability: Level::Medium,
                consequence: Level::Low,
            }),
        ),
        (Board::Task, "Queue", task_payload(TaskStatus::Queue)),
    ];
    for (board, box_name, payload) in cases {
        let (_, before) = api.get(&format!("/cases/{id}/events"));
        let (status, event) = api.card(id, CardMutation::new(board, box_name, CardAction::Create).payload(&payload));
        assert_eq!(status, StatusCode::CREATED, "{box_name}: {event}");
        let (_, after) = api.get(&format!("/cases/{id}/events"));
        assert_eq!(after.as_array().unwrap().len(), before.as_array().unwrap().len() + 1);
        let expected = edw_core::domain::classify(board, box_name).unwrap().id();
        assert_eq!(event["event_category"], json!(expected), "{box_name}");
        assert_eq!(after.as_array().unwrap().last().unwrap(), &event);
    }
    let (_, cards) = api.get(&format!("/cases/{id}/cards"));
    let cards: Vec<CardView> = serde_json::from_value(cards).unwrap();
    // Seven board cards plus the case-settings card.
    assert_eq!(cards.len(), 8);
    let risk = cards.iter().find(|c| c.category.id() == 18).unwrap();
    assert_eq!(risk.fields["probability"], json!("Medium"));
}

#[test]
fn deleted_cards_disappear_and_stay_deleted() {
    let api = Api::start(None);
    let id = api.create_case(None).case.case_id.0;
    let (_, created) = api.card(id, CardMutation::new(Board::Resource, "Values", CardAction::Create).title("Honesty"));
    let card = CardId::new(created["card_id"].as_str().unwrap());
    let (status, _) = api.card(id, CardMutation::new(Board::Resource, "Values", CardAction::Delete).card(card.clone()));
    assert_eq!(status, StatusCode::OK);
    let (_, cards) = api.get(&format!("/cases/{id}/cards"));
    let cards: Vec<CardView> = serde_json::from_value(cards).unwrap();
    assert!(cards.iter().all(|c| c.card_id != card));
    assert_eq!(cards.len(), 1);
    expect_error(
        api.card(id, CardMutation::new(Board::Resource, "Values", CardAction::Update).card(card)),
        StatusCode::CONFLICT,
        "LIFECYCLE_VIOLATION",
    );
}

#[test]
fn racing_deletes_have_exactly_one_winner() {
    let api = Api::start(None);
    let id = api.create_case(None).case.case_id.0;
    let (_, created) = api.card(id, CardMutation::new(Board::Resource, "Vision", CardAction::Create));
    let card = CardId::new(created["card_id"].as_str().unwrap());
    let statuses: Vec<StatusCode> = thread::scope(|s| {
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let card = card.clone();
                let api = &api;
                s.spawn(move || api.card(id, CardMutation::new(Board::Resource, "Vision", CardAction::Delete).card(card)).0)
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert_eq!(statuses.iter().filter(|s| **s == StatusCode::OK).count(), 1);
    assert_eq!(statuses.iter().filter(|s| **s == StatusCode::CONFLICT).count(), 7);
}

#[test]
fn task_moves_show_up_in_the_activity_feed() {
    let api = Api::start(None);
    let id = api.create_case(None).case.case_id.0;
    let (_, created) = api.card(
        id,
        CardMutation::new(Board::Task, "Queue", CardAction::Create).payload(&task_payload(TaskStatus::Queue)),
    );
    let card = created["card_id"].as_str().unwrap().to_string();
    let (status, moved) = api.post(
        &format!("/cases/{id}/tasks/{card}/move"),
        json!({ "participant_id": "liv", "to": "Active" }),
    );
    assert_eq!(status, StatusCode::OK, "{moved}");
    assert_eq!(moved["action_type"], json!("Move"));
    let since = created["event_id"].as_u64().unwrap();
    let (_, feed) = api.get(&format!("/cases/{id}/events?since={since}"));
    assert_eq!(feed, json!([moved]));

    expect_error(
        api.post(&format!("/cases/{id}/tasks/{card}/move"), json!({ "participant_id": "liv", "to": "Active" })),
        StatusCode::CONFLICT,
        "ILLEGAL_TRANSITION",
    );
    expect_error(
        api.post(&format!("/cases/{id}/tasks/c-999/move"), json!({ "participant_id": "liv", "to": "Done" })),
        StatusCode::NOT_FOUND,
        "UNKNOWN_CARD",
    );
}

#[test]
fn tests_are_scored_and_journaled() {
    let api = Api::start(None);
    let id = api.create_case(None).case.case_id.0;
    let response = |ratings: &[(&str, u8)]| TestResponse {
        interviewee_id: "i1".into(),
        ratings: ratings.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        added_items: Vec::new(),
        comments: Default::default(),
    };
    let (status, body) = api.post(
        &format!("/cases/{id}/tests"),
        TestRequest {
            participant_id: ParticipantId::new("liv"),
            test_type: 20,
            responses: vec![response(&[("cold hands", 6), ("wet gear", 3)])],
            estimates: Vec::new(),
        },
    );
    assert_eq!(status, StatusCode::CREATED, "{body}");
    assert_eq!(body["outcome"]["average_score"], json!(4.5));
    assert_eq!(body["event"]["event_category"], json!(20));

    let estimate = MarketEstimate {
        market_name: "Nordland".into(),
        customers_low: 1000,
        customers_high: 2000,
        share_low: Decimal::new(10, 2),
        share_high: Decimal::new(20, 2),
        value_low: nok(100),
        value_high: nok(200),
    };
    let (status, body) = api.post(
        &format!("/cases/{id}/tests"),
        TestRequest {
            participant_id: ParticipantId::new("liv"),
            test_type: 22,
            responses: Vec::new(),
            estimates: vec![estimate.clone()],
        },
    );
    assert_eq!(status, StatusCode::CREATED, "{body}");
    let expected = compute_market_size(&[estimate]).unwrap();
    assert_eq!(body["results"][0]["market_size"], serde_json::to_value(&expected[0]).unwrap());
    assert_eq!(expected[0].revenue_min.amount, Decimal::from(10_000));
    assert_eq!(expected[0].revenue_max.amount, Decimal::from(80_000));

    let bad = |test_type: u8, rating: u8| TestRequest {
        participant_id: ParticipantId::new("liv"),
        test_type,
        responses: vec![response(&[("cold hands", rating)])],
        estimates: Vec::new(),
    };
    expect_error(api.post(&format!("/cases/{id}/tests"), bad(20, 9)), StatusCode::UNPROCESSABLE_ENTITY, "RATING_OUT_OF_RANGE");
    expect_error(api.post(&format!("/cases/{id}/tests"), bad(5, 3)), StatusCode::UNPROCESSABLE_ENTITY, "INVALID_TEST_TYPE");
    expect_error(api.post(&format!("/cases/{id}/tests"), bad(77, 3)), StatusCode::UNPROCESSABLE_ENTITY, "INVALID_TEST_TYPE");
}

#[test]
fn objectives_feed_the_overview() {
    let api = Api::start(None);
    let id = api.create_case(None).case.case_id.0;
    let (status, _) = api.post(
        &format!("/cases/{id}/objectives"),
        ObjectiveRequest {
            participant_id: ParticipantId::new("liv"),
            objective: ObjectiveInput {
                card_id: None,
                title: "First sales".into(),
                description: String::new(),
                fields: ObjectiveFields {
                    objective_category: ObjectiveCategory::Money,
                    objective_type: ObjectiveType::Revenue,
                    actual_vs_forecast: ActualOrForecast::Forecast,
                    month: YearMonth::new(2017, 4).unwrap(),
                    value: Some(nok(30_000)),
                },
            },
        },
    );
    assert_eq!(status, StatusCode::CREATED);
    let (status, overview) = api.get(&format!("/cases/{id}/overview?month=2017-04"));
    assert_eq!(status, StatusCode::OK, "{overview}");
    assert_eq!(overview["pnl_forecast"].as_object().unwrap().len(), 6);
    assert_eq!(overview["pnl_forecast"]["2017-04"]["revenue"], json!("30000"));
    let (status, _) = api.get(&format!("/cases/{id}/overview"));
    assert_eq!(status, StatusCode::OK);
    expect_error(api.get(&format!("/cases/{id}/overview?month=April")), StatusCode::BAD_REQUEST, "MALFORMED_REQUEST");
    expect_error(
        api.post(
            &format!("/cases/{id}/objectives"),
            json!({ "participant_id": "liv", "title": "x", "fields": { "objective_category": "Money" } }),
        ),
        StatusCode::BAD_REQUEST,
        "MALFORMED_REQUEST",
    );
}

#[test]
fn business_ideas_are_linked_and_validated() {
    let api = Api::start(None);
    let id = api.create_case(None).case.case_id.0;
    let create = |box_name: &str| {
        let (_, e) = api.card(id, CardMutation::new(Board::BusinessIdea, box_name, CardAction::Create).title(box_name));
        e["card_id"].as_str().unwrap().to_string()
    };
    let idea = create("Business Idea");
    let contribution = create("Key Contribution");
    let (status, body) = api.post(
        &format!("/cases/{id}/ideas/{idea}/links"),
        json!({ "participant_id": "liv", "card_id": contribution, "link": true }),
    );
    assert_eq!(status, StatusCode::OK, "{body}");
    let (status, view) = api.get(&format!("/cases/{id}/ideas/{idea}"));
    assert_eq!(status, StatusCode::OK);
    assert_ne!(view["validation"], json!("Valid"));
    expect_error(api.get(&format!("/cases/{id}/ideas/c-404")), StatusCode::NOT_FOUND, "UNKNOWN_CARD");
}

#[test]
fn errors_use_the_code_message_shape() {
    let api = Api::start(None);
    let id = api.create_case(None).case.case_id.0;
    expect_error(api.get("/cases/41"), StatusCode::NOT_FOUND, "UNKNOWN_CASE");
    expect_error(api.get("/cases/forty"), StatusCode::BAD_REQUEST, "MALFORMED_REQUEST");
    expect_error(api.get("/nowhere"), StatusCode::NOT_FOUND, "NOT_FOUND");
    expect_error(
        api.call(Method::POST, &format!("/cases/{id}/cards"), Some(Value::String("{".into()))),
        StatusCode::BAD_REQUEST,
        "MALFORMED_REQUEST",
    );
    expect_error(
        api.card(id, CardMutation::new(Board::Resource, "Key Market", CardAction::Create)),
        StatusCode::UNPROCESSABLE_ENTITY,
        "UNKNOWN_BOX",
    );
    expect_error(
        api.post(
            &format!("/cases/{id}/cards"),
            CardRequest {
                participant_id: ParticipantId::new("mallory"),
                mutation: CardMutation::new(Board::Resource, "Vision", CardAction::Create),
            },
        ),
        StatusCode::FORBIDDEN,
        "FOREIGN_PARTICIPANT",
    );
    expect_error(
        api.put(&format!("/cases/{id}/consent"), json!({ "consent": false })),
        StatusCode::UNPROCESSABLE_ENTITY,
        "NO_COMPANY_LINK",
    );
    let mut bad_org = new_case(Some(NewCompanyLink {
        company_name: "X".into(),
        organization_number: "12AB".into(),
        country: "NO".into(),
    }));
    bad_org.title = "bad".into();
    expect_error(api.post("/cases", bad_org), StatusCode::UNPROCESSABLE_ENTITY, "INVALID_ORG_NUMBER");
}

#[test]
fn company_links_are_verified_through_the_mock_registry() {
    let fixtures: Arc<dyn RegistrySource> = Arc::new(FixtureRegistry::from_file(FIXTURE).unwrap());
    let registry = BackgroundServer::start(registry_router(fixtures)).unwrap();
    let client: Arc<dyn RegistrySource> = Arc::new(HttpRegistryClient::new(&registry.url()).unwrap());
    let api = Api::start(Some(client));
    let created = api.create_case(Some(NewCompanyLink {
        company_name: "Fjordlys Teknologi AS".into(),
        organization_number: "915429785".into(),
        country: "NO".into(),
    }));
    let link = created.case.company_link.unwrap();
    assert_eq!(serde_json::to_value(link.verification).unwrap(), json!("Verified"));

    let id = created.case.case_id.0;
    let (status, link) = api.put(&format!("/cases/{id}/consent"), json!({ "consent": false }));
    assert_eq!(status, StatusCode::OK);
    assert_eq!(link["consent"], json!(false));

    let unknown = api.create_case(Some(NewCompanyLink {
        company_name: "Nowhere AS".into(),
        organization_number: "999999999".into(),
        country: "NO".into(),
    }));
    assert_eq!(serde_json::to_value(unknown.case.company_link.unwrap().verification).unwrap(), json!("NotInRegistry"));
}
