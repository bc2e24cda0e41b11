use std::collections::BTreeMap;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::domain::{
    ActualOrForecast, CardId, CategoryPayload, MarketSizeFields, ObjectiveCategory, ObjectiveType, Quantity,
    Recurrence, TaskStatus,
};
use crate::journal::{CardSnapshot, Lifecycle};
use crate::time::YearMonth;

use super::catalog::CaseRecord;
use super::PlatformError;

/// One interviewee's answers in a problem or solution test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestResponse {
    pub interviewee_id: String,
    /// Item → rating on the 7-point scale.
    pub ratings: BTreeMap<String, u8>,
    #[serde(default)]
    pub added_items: Vec<String>,
    #[serde(default)]
    pub comments: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutcome {
    pub average_score: f64,
    pub customer_added: bool,
    pub ratings: usize,
}

/// Unweighted mean over every (interviewee, item) rating.
pub fn score_responses(responses: &[TestResponse]) -> Result<TestOutcome, PlatformError> {
    let mut sum = 0u64;
    let mut count = 0usize;
    for response in responses {
        for (item, rating) in &response.ratings {
            if !(1..=7).contains(rating) {
                return Err(PlatformError::RatingOutOfRange {
                    item: item.clone(),
                    rating: *rating,
                });
            }
            sum += u64::from(*rating);
            count += 1;
        }
    }
    if count == 0 {
        return Err(PlatformError::EmptyResponses);
    }
    Ok(TestOutcome {
        average_score: sum as f64 / count as f64,
        customer_added: responses.iter().any(|r| r.added_items.iter().any(|i| !i.trim().is_empty())),
        ratings: count,
    })
}

/// Minimum and maximum guesses for one market.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketEstimate {
    pub market_name: String,
    pub customers_low: u64,
    pub customers_high: u64,
    pub share_low: Decimal,
    pub share_high: Decimal,
    pub value_low: Quantity,
    pub value_high: Quantity,
}

impl MarketEstimate {
    pub fn to_fields(&self) -> MarketSizeFields {
        MarketSizeFields {
            customers_low: self.customers_low,
            customers_high: self.customers_high,
            share_low: self.share_low,
            share_high: self.share_high,
            value_per_customer_low: self.value_low,
            value_per_customer_high: self.value_high,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketSize {
    pub market_name: String,
    pub revenue_min: Quantity,
    pub revenue_max: Quantity,
}

fn revenue(customers: u64, share: Decimal, value: &Quantity) -> Result<Quantity, PlatformError> {
    let amount = Decimal::from(customers)
        .checked_mul(share)
        .and_then(|x| x.checked_mul(value.amount))
        .ok_or_else(|| PlatformError::InvalidEstimate("revenue overflows the decimal range".into()))?;
    Ok(Quantity {
        amount: amount.normalize(),
        currency: value.currency,
    })
}

/// Revenue bounds per market: customers × share × value per customer, taken
/// at the low and at the high end.
pub fn compute_market_size(estimates: &[MarketEstimate]) -> Result<Vec<MarketSize>, PlatformError> {
    estimates
        .iter()
        .map(|e| {
            e.to_fields()
                .validate()
                .map_err(|err| PlatformError::InvalidEstimate(format!("{}: {err}", e.market_name)))?;
            Ok(MarketSize {
                market_name: e.market_name.clone(),
                revenue_min: revenue(e.customers_low, e.share_low, &e.value_low)?,
                revenue_max: revenue(e.customers_high, e.share_high, &e.value_high)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PnlMonth {
    pub revenue: Decimal,
    pub cost: Decimal,
    pub net: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskItem {
    pub card_id: CardId,
    pub title: String,
    pub month: YearMonth,
    pub status: TaskStatus,
    pub value: Quantity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObjectiveItem {
    pub card_id: CardId,
    pub title: String,
    pub month: YearMonth,
    pub objective_category: ObjectiveCategory,
    pub objective_type: ObjectiveType,
    pub actual_vs_forecast: ActualOrForecast,
    pub value: Option<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndOfMonth {
    pub unfinished_tasks: Vec<TaskItem>,
    pub period_objectives: Vec<ObjectiveItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Overview {
    pub period_start: YearMonth,
    pub period_end: YearMonth,
    pub pnl_forecast: BTreeMap<YearMonth, PnlMonth>,
    pub end_of_month: EndOfMonth,
}

/// P&L forecast and end-of-month review over the case's live cards.
/// Amounts are summed as plain decimals; currencies are not converted.
pub fn compute_overview(case: &CaseRecord, cards: &[CardSnapshot], clock_month: YearMonth) -> Overview {
    let mut pnl: BTreeMap<YearMonth, PnlMonth> = case.months().map(|m| (m, PnlMonth::default())).collect();
    // (type, month) cell → (actual sum, forecast sum, has actual)
    let mut cells: BTreeMap<(ObjectiveType, YearMonth), (Decimal, Decimal, bool)> = BTreeMap::new();
    let mut tasks = Vec::new();
    let mut objectives = Vec::new();

    for card in cards.iter().filter(|c| c.lifecycle == Lifecycle::Live) {
        match &card.payload {
            CategoryPayload::Objective(o) => {
                if o.objective_category == ObjectiveCategory::Money {
                    if let Some(v) = &o.value {
                        let cell = cells.entry((o.objective_type, o.month)).or_default();
                        match o.actual_vs_forecast {
                            ActualOrForecast::Actual => {
                                cell.0 += v.amount;
                                cell.2 = true;
                            }
                            ActualOrForecast::Forecast => cell.1 += v.amount,
                        }
                    }
                }
                if case.contains_month(o.month) {
                    objectives.push(ObjectiveItem {
                        card_id: card.card_id.clone(),
                        title: card.title.clone(),
                        month: o.month,
                        objective_category: o.objective_category,
                        objective_type: o.objective_type,
                        actual_vs_forecast: o.actual_vs_forecast,
                        value: o.value,
                    });
                }
            }
            CategoryPayload::Task(t) => {
                let months: Vec<YearMonth> = match t.recurrence {
                    Recurrence::OneOff => vec![t.month],
                    Recurrence::Monthly => t.month.max(case.period_start).through(case.period_end).collect(),
                };
                for month in months {
                    if let Some(row) = pnl.get_mut(&month) {
                        row.cost += t.value.amount;
                    }
                }
                if t.status != TaskStatus::Done && t.month <= clock_month {
                    tasks.push(TaskItem {
                        card_id: card.card_id.clone(),
                        title: card.title.clone(),
                        month: t.month,
                        status: t.status,
                        value: t.value,
                    });
                }
            }
            _ => {}
        }
    }
    for ((_, month), (actual, forecast, has_actual)) in cells {
        if let Some(row) = pnl.get_mut(&month) {
            row.revenue += if has_actual { actual } else { forecast };
        }
    }
    for row in pnl.values_mut() {
        row.net = row.revenue - row.cost;
    }
    tasks.sort_by(|a, b| (a.month, &a.card_id).cmp(&(b.month, &b.card_id)));
    objectives.sort_by(|a, b| (a.month, &a.card_id).cmp(&(b.month, &b.card_id)));
    Overview {
        period_start: case.period_start,
        period_end: case.period_end,
        pnl_forecast: pnl,
        end_of_month: EndOfMonth {
            unfinished_tasks: tasks,
            period_objectives: objectives,
        },
    }
}
