use serde::{Deserialize, Serialize};

use super::{DomainError, EventCategory, ObjectiveCategory, TaskStatus};

/// A planning surface. `CustomerTest` holds the three customer-test records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Board {
    Resource,
    BusinessIdea,
    BusinessModel,
    Gap,
    Objectives,
    Risk,
    Task,
    CustomerTest,
}

use EventCategory as C;

const BOXES: &[(Board, &str, EventCategory)] = &[
    (Board::Resource, "Values", C::Values),
    (Board::Resource, "Vision", C::Vision),
    (Board::Resource, "Owner's Objectives", C::OwnersObjectives),
    (Board::BusinessIdea, "Business Idea", C::BusinessIdea),
    (Board::BusinessIdea, "Key Contribution", C::KeyContribution),
    (Board::BusinessIdea, "Key Market", C::KeyMarket),
    (Board::BusinessIdea, "Distinction", C::Distinction),
    (Board::BusinessModel, "Early Market Customer", C::EarlyMarketCustomer),
    (Board::BusinessModel, "Unique Value Proposition", C::UniqueValueProposition),
    (Board::BusinessModel, "Product Feature", C::ProductFeature),
    (Board::BusinessModel, "Partner", C::Partner),
    (Board::BusinessModel, "How to Sell", C::HowToSell),
    (Board::BusinessModel, "How to Get Paid", C::HowToGetPaid),
    (Board::Gap, "Strength & Weaknesses", C::StrengthWeaknesses),
    (Board::Objectives, "Skills Objectives", C::Objectives),
    (Board::Objectives, "Product and Market Objectives", C::Objectives),
    (Board::Objectives, "Money Objectives", C::Objectives),
    (Board::Risk, "Opportunities & Threats", C::OpportunitiesThreats),
    (Board::Task, "Queue", C::Task),
    (Board::Task, "Active", C::Task),
    (Board::Task, "Done", C::Task),
    (Board::CustomerTest, "Problem Worth Solving?", C::ProblemWorthSolving),
    (Board::CustomerTest, "Solve the Problem?", C::SolveTheProblem),
    (Board::CustomerTest, "Market Big Enough?", C::MarketBigEnough),
];

impl Board {
    pub const ALL: [Board; 8] = [
        Board::Resource,
        Board::BusinessIdea,
        Board::BusinessModel,
        Board::Gap,
        Board::Objectives,
        Board::Risk,
        Board::Task,
        Board::CustomerTest,
    ];

    pub fn boxes(self) -> impl Iterator<Item = &'static str> {
        BOXES
            .iter()
            .filter(move |(b, _, _)| *b == self)
            .map(|(_, name, _)| *name)
    }

    /// Canonical box name for a category (the first box that classifies to it).
    pub fn box_for(category: EventCategory) -> Option<(Board, &'static str)> {
        BOXES
            .iter()
            .find(|(_, _, c)| *c == category)
            .map(|(b, name, _)| (*b, *name))
    }

    fn lookup(self, box_name: &str) -> Option<&'static (Board, &'static str, EventCategory)> {
        let wanted = box_name.trim();
        BOXES
            .iter()
            .find(|(b, name, _)| *b == self && name.eq_ignore_ascii_case(wanted))
    }

    /// The objective category a box on the Objectives board holds.
    pub fn objective_box(box_name: &str) -> Option<ObjectiveCategory> {
        match Board::Objectives.lookup(box_name)?.1 {
            "Skills Objectives" => Some(ObjectiveCategory::Skills),
            "Product and Market Objectives" => Some(ObjectiveCategory::ProductMarket),
            "Money Objectives" => Some(ObjectiveCategory::Money),
            _ => None,
        }
    }

    pub fn objective_box_name(category: ObjectiveCategory) -> &'static str {
        match category {
            ObjectiveCategory::Skills => "Skills Objectives",
            ObjectiveCategory::ProductMarket => "Product and Market Objectives",
            ObjectiveCategory::Money => "Money Objectives",
        }
    }

    /// The task status a box on the Task board holds.
    pub fn task_box(box_name: &str) -> Option<TaskStatus> {
        match Board::Task.lookup(box_name)?.1 {
            "Queue" => Some(TaskStatus::Queue),
            "Active" => Some(TaskStatus::Active),
            "Done" => Some(TaskStatus::Done),
            _ => None,
        }
    }
}

/// Category of a card placed in `box_name` on `board`.
pub fn classify(board: Board, box_name: &str) -> Result<EventCategory, DomainError> {
    board
        .lookup(box_name)
        .map(|(_, _, category)| *category)
        .ok_or_else(|| DomainError::UnknownBox {
            board,
            box_name: box_name.to_string(),
        })
}
