use rust_decimal::Decimal;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{CanvasModel, EventCategory, ParticipantType, Quantity};
use crate::time::YearMonth;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Strength,
    Weakness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ObjectiveCategory {
    Skills,
    ProductMarket,
    Money,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ObjectiveType {
    Milestone,
    Numerical,
    Revenue,
    Loan,
    Equity,
    Grant,
}

impl ObjectiveType {
    pub fn allowed_for(self, category: ObjectiveCategory) -> bool {
        use ObjectiveType::*;
        match category {
            ObjectiveCategory::Money => matches!(self, Revenue | Loan | Equity | Grant),
            ObjectiveCategory::Skills | ObjectiveCategory::ProductMarket => {
                matches!(self, Milestone | Numerical)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActualOrForecast {
    Actual,
    Forecast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RiskKind {
    Opportunity,
    Threat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TaskStatus {
    Queue,
    Active,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Recurrence {
    OneOff,
    Monthly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegistrationStatus {
    Registered,
    Bankrupt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantFields {
    pub participant_type: ParticipantType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSettingsFields {
    pub canvas_model: CanvasModel,
    pub period_months: u8,
    pub rolling: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapFields {
    pub polarity: Polarity,
    /// The case company itself or one of its named competitors.
    pub subject_company: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveFields {
    pub objective_category: ObjectiveCategory,
    pub objective_type: ObjectiveType,
    pub actual_vs_forecast: ActualOrForecast,
    pub month: YearMonth,
    /// Absent only for milestones.
    pub value: Option<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskFields {
    pub kind: RiskKind,
    pub probability: Level,
    pub consequence: Level,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskFields {
    pub cost_group: String,
    pub month: YearMonth,
    pub actual_vs_forecast: ActualOrForecast,
    pub value: Quantity,
    pub status: TaskStatus,
    pub recurrence: Recurrence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestScoreFields {
    pub average_score: f64,
    /// Whether any interviewee added their own problem or feature.
    pub customer_added: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSizeFields {
    pub customers_low: u64,
    pub customers_high: u64,
    pub share_low: Decimal,
    pub share_high: Decimal,
    pub value_per_customer_low: Quantity,
    pub value_per_customer_high: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinancialFields {
    pub year: i32,
    pub value: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistrationFields {
    pub year: i32,
    pub status: RegistrationStatus,
}

/// The category-specific fields of an event. Each category admits exactly one shape.
#[derive(Debug, Clone, PartialEq)]
pub enum CategoryPayload {
    /// Resource, business-idea and business-model cards carry no specific fields.
    None,
    Participant(ParticipantFields),
    CaseSettings(CaseSettingsFields),
    Gap(GapFields),
    Objective(ObjectiveFields),
    Risk(RiskFields),
    Task(TaskFields),
    TestScore(TestScoreFields),
    MarketSize(MarketSizeFields),
    Financial(FinancialFields),
    Registration(RegistrationFields),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PayloadError {
    #[error("category {category} does not take a {found} payload")]
    CategoryMismatch { category: u8, found: &'static str },
    #[error("category {category} payload is missing field {field:?}")]
    MissingField { category: u8, field: String },
    #[error("category {category} payload has unexpected field {field:?}")]
    UnexpectedField { category: u8, field: String },
    #[error("invalid value for {field:?}: {reason}")]
    InvalidField { field: String, reason: String },
}

fn invalid(field: &str, reason: impl Into<String>) -> PayloadError {
    PayloadError::InvalidField {
        field: field.to_string(),
        reason: reason.into(),
    }
}

const NO_FIELDS: &[&str] = &[];
const PARTICIPANT: &[&str] = &["participant_type"];
const CASE_SETTINGS: &[&str] = &["canvas_model", "period_months", "rolling"];
const GAP: &[&str] = &["polarity", "subject_company"];
const OBJECTIVE: &[&str] = &["objective_category", "objective_type", "actual_vs_forecast", "month", "value"];
const RISK: &[&str] = &["kind", "probability", "consequence"];
const TASK: &[&str] = &["cost_group", "month", "actual_vs_forecast", "value", "status", "recurrence"];
const TEST_SCORE: &[&str] = &["average_score", "customer_added"];
const MARKET_SIZE: &[&str] = &[
    "customers_low",
    "customers_high",
    "share_low",
    "share_high",
    "value_per_customer_low",
    "value_per_customer_high",
];
const FINANCIAL: &[&str] = &["year", "value"];
const REGISTRATION: &[&str] = &["year", "status"];

impl CategoryPayload {
    /// The exact field set a category's payload carries, in schema order.
    pub fn field_names(category: EventCategory) -> &'static [&'static str] {
        match category.id() {
            1 => PARTICIPANT,
            2 => CASE_SETTINGS,
            3..=15 => NO_FIELDS,
            16 => GAP,
            17 => OBJECTIVE,
            18 => RISK,
            19 => TASK,
            20 | 21 => TEST_SCORE,
            22 => MARKET_SIZE,
            23 | 33 => REGISTRATION,
            _ => FINANCIAL,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CategoryPayload::None => "empty",
            CategoryPayload::Participant(_) => "participant",
            CategoryPayload::CaseSettings(_) => "case-settings",
            CategoryPayload::Gap(_) => "gap",
            CategoryPayload::Objective(_) => "objective",
            CategoryPayload::Risk(_) => "risk",
            CategoryPayload::Task(_) => "task",
            CategoryPayload::TestScore(_) => "test-score",
            CategoryPayload::MarketSize(_) => "market-size",
            CategoryPayload::Financial(_) => "financial",
            CategoryPayload::Registration(_) => "registration",
        }
    }

    fn fits(&self, category: EventCategory) -> bool {
        let id = category.id();
        match self {
            CategoryPayload::None => (3..=15).contains(&id),
            CategoryPayload::Participant(_) => id == 1,
            CategoryPayload::CaseSettings(_) => id == 2,
            CategoryPayload::Gap(_) => id == 16,
            CategoryPayload::Objective(_) => id == 17,
            CategoryPayload::Risk(_) => id == 18,
            CategoryPayload::Task(_) => id == 19,
            CategoryPayload::TestScore(_) => id == 20 || id == 21,
            CategoryPayload::MarketSize(_) => id == 22,
            CategoryPayload::Registration(_) => id == 23 || id == 33,
            CategoryPayload::Financial(_) => (24..=32).contains(&id) || id == 34,
        }
    }

    /// Checks shape against the category and every value-level invariant.
    pub fn validate(&self, category: EventCategory) -> Result<(), PayloadError> {
        if !self.fits(category) {
            return Err(PayloadError::CategoryMismatch {
                category: category.id(),
                found: self.kind(),
            });
        }
        match self {
            CategoryPayload::CaseSettings(s) => {
                if !crate::domain::case::PERIOD_MONTHS.contains(&s.period_months) {
                    return Err(invalid("period_months", "must be 3, 6, 9 or 12"));
                }
            }
            CategoryPayload::Gap(g) => {
                if g.subject_company.trim().is_empty() {
                    return Err(invalid("subject_company", "must not be empty"));
                }
            }
            CategoryPayload::Objective(o) => {
                if !o.objective_type.allowed_for(o.objective_category) {
                    return Err(invalid(
                        "objective_type",
                        format!("{:?} is not a {:?} objective type", o.objective_type, o.objective_category),
                    ));
                }
                match (&o.value, o.objective_type) {
                    (None, ObjectiveType::Milestone) => {}
                    (None, _) => return Err(invalid("value", "required for numerical and money objectives")),
                    (Some(v), _) if o.objective_category == ObjectiveCategory::Money && v.currency.is_none() => {
                        return Err(invalid("value", "money objectives need a currency"))
                    }
                    _ => {}
                }
            }
            CategoryPayload::Task(t) => {
                if t.value.is_negative() {
                    return Err(invalid("value", "task cost must be non-negative"));
                }
                if t.value.currency.is_none() {
                    return Err(invalid("value", "task cost needs a currency"));
                }
            }
            CategoryPayload::TestScore(t) => {
                if !t.average_score.is_finite() || !(1.0..=7.0).contains(&t.average_score) {
                    return Err(invalid("average_score", "must lie in [1, 7]"));
                }
            }
            CategoryPayload::MarketSize(m) => m.validate()?,
            CategoryPayload::Financial(f) => {
                if category == EventCategory::NumberOfEmployees
                    && (f.value.is_negative() || f.value.amount.fract() != Decimal::ZERO)
                {
                    return Err(invalid("value", "employee count must be a non-negative integer"));
                }
            }
            CategoryPayload::None
            | CategoryPayload::Participant(_)
            | CategoryPayload::Risk(_)
            | CategoryPayload::Registration(_) => {}
        }
        Ok(())
    }

    /// Builds a payload from a field map, rejecting any missing or foreign field.
    pub fn from_fields(category: EventCategory, fields: &Map<String, Value>) -> Result<Self, PayloadError> {
        let expected = Self::field_names(category);
        for name in expected {
            if !fields.contains_key(*name) {
                return Err(PayloadError::MissingField {
                    category: category.id(),
                    field: name.to_string(),
                });
            }
        }
        if let Some(extra) = fields.keys().find(|k| !expected.contains(&k.as_str())) {
            return Err(PayloadError::UnexpectedField {
                category: category.id(),
                field: extra.clone(),
            });
        }
        fn parse<T: DeserializeOwned>(fields: &Map<String, Value>) -> Result<T, PayloadError> {
            serde_json::from_value(Value::Object(fields.clone())).map_err(|e| invalid("payload", e.to_string()))
        }
        let payload = match category.id() {
            1 => CategoryPayload::Participant(parse(fields)?),
            2 => CategoryPayload::CaseSettings(parse(fields)?),
            3..=15 => CategoryPayload::None,
            16 => CategoryPayload::Gap(parse(fields)?),
            17 => CategoryPayload::Objective(parse(fields)?),
            18 => CategoryPayload::Risk(parse(fields)?),
            19 => CategoryPayload::Task(parse(fields)?),
            20 | 21 => CategoryPayload::TestScore(parse(fields)?),
            22 => CategoryPayload::MarketSize(parse(fields)?),
            23 | 33 => CategoryPayload::Registration(parse(fields)?),
            _ => CategoryPayload::Financial(parse(fields)?),
        };
        payload.validate(category)?;
        Ok(payload)
    }

    /// Field map in schema order.
    pub fn to_fields(&self) -> Map<String, Value> {
        fn obj<T: Serialize>(fields: &T) -> Map<String, Value> {
            match serde_json::to_value(fields) {
                Ok(Value::Object(map)) => map,
                _ => unreachable!("payload structs serialize to objects"),
            }
        }
        match self {
            CategoryPayload::None => Map::new(),
            CategoryPayload::Participant(f) => obj(f),
            CategoryPayload::CaseSettings(f) => obj(f),
            CategoryPayload::Gap(f) => obj(f),
            CategoryPayload::Objective(f) => obj(f),
            CategoryPayload::Risk(f) => obj(f),
            CategoryPayload::Task(f) => obj(f),
            CategoryPayload::TestScore(f) => obj(f),
            CategoryPayload::MarketSize(f) => obj(f),
            CategoryPayload::Financial(f) => obj(f),
            CategoryPayload::Registration(f) => obj(f),
        }
    }
}

impl MarketSizeFields {
    pub fn validate(&self) -> Result<(), PayloadError> {
        if self.customers_low > self.customers_high {
            return Err(invalid("customers_low", "must not exceed customers_high"));
        }
        let unit = Decimal::ONE;
        for (name, share) in [("share_low", self.share_low), ("share_high", self.share_high)] {
            if share < Decimal::ZERO || share > unit {
                return Err(invalid(name, "market share must lie in [0, 1]"));
            }
        }
        if self.share_low > self.share_high {
            return Err(invalid("share_low", "must not exceed share_high"));
        }
        let (lo, hi) = (&self.value_per_customer_low, &self.value_per_customer_high);
        if lo.is_negative() || hi.is_negative() {
            return Err(invalid("value_per_customer_low", "values must be non-negative"));
        }
        if lo.currency != hi.currency {
            return Err(invalid("value_per_customer_high", "low and high must share a currency"));
        }
        if lo.amount > hi.amount {
            return Err(invalid("value_per_customer_low", "must not exceed value_per_customer_high"));
        }
        Ok(())
    }
}
