use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Where an event category originates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    Adm,
    Res,
    Bi,
    Bm,
    Gap,
    Obj,
    Risk,
    Task,
    Test,
    Proff,
}

impl Source {
    pub fn label(&self) -> &'static str {
        match self {
            Source::Adm => "ADM",
            Source::Res => "RES",
            Source::Bi => "BI",
            Source::Bm => "BM",
            Source::Gap => "GAP",
            Source::Obj => "OBJ",
            Source::Risk => "RISK",
            Source::Task => "TASK",
            Source::Test => "TEST",
            Source::Proff => "PROFF",
        }
    }
}

macro_rules! categories {
    ($($variant:ident = $id:literal, $source:ident, $name:literal;)*) => {
        /// The fixed taxonomy every event belongs to.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        #[repr(u8)]
        pub enum EventCategory {
            $($variant = $id,)*
        }

        impl EventCategory {
            pub const ALL: [EventCategory; 34] = [$(EventCategory::$variant,)*];

            pub fn from_id(id: u8) -> Option<Self> {
                match id {
                    $($id => Some(EventCategory::$variant),)*
                    _ => None,
                }
            }

            pub fn source(&self) -> Source {
                match self {
                    $(EventCategory::$variant => Source::$source,)*
                }
            }

            pub fn name(&self) -> &'static str {
                match self {
                    $(EventCategory::$variant => $name,)*
                }
            }
        }
    };
}

categories! {
    Participants = 1, Adm, "Participants";
    CaseSettings = 2, Adm, "Case Settings";
    Values = 3, Res, "Values";
    Vision = 4, Res, "Vision";
    OwnersObjectives = 5, Res, "Owner's Objectives";
    BusinessIdea = 6, Bi, "Business Idea";
    KeyContribution = 7, Bi, "Key Contribution";
    KeyMarket = 8, Bi, "Key Market";
    Distinction = 9, Bi, "Distinction";
    EarlyMarketCustomer = 10, Bm, "Early Market Customer";
    UniqueValueProposition = 11, Bm, "Unique Value Proposition";
    ProductFeature = 12, Bm, "Product Feature";
    Partner = 13, Bm, "Partner";
    HowToSell = 14, Bm, "How to Sell";
    HowToGetPaid = 15, Bm, "How to Get Paid";
    StrengthWeaknesses = 16, Gap, "Strength & Weaknesses";
    Objectives = 17, Obj, "Objectives";
    OpportunitiesThreats = 18, Risk, "Opportunities & Threats";
    Task = 19, Task, "Task";
    ProblemWorthSolving = 20, Test, "Problem Worth Solving?";
    SolveTheProblem = 21, Test, "Solve the Problem?";
    MarketBigEnough = 22, Test, "Market Big Enough?";
    Registration = 23, Proff, "Registration";
    Revenue = 24, Proff, "Revenue";
    ProfitLoss = 25, Proff, "Profit & Loss";
    BalanceSum = 26, Proff, "Balance Sum";
    ReturnOnAssets = 27, Proff, "Return On Assets";
    ProfitLossPercentage = 28, Proff, "Profit & Loss Percentage";
    ReturnOnEquity = 29, Proff, "Return on Equity";
    CurrentRatio = 30, Proff, "Current Ratio";
    EquityRatio = 31, Proff, "Equity Ratio";
    Gearing = 32, Proff, "Gearing";
    RegistrationOrBankruptcy = 33, Proff, "Registration or Bankruptcy";
    NumberOfEmployees = 34, Proff, "Number of Employees";
}

impl EventCategory {
    pub fn id(&self) -> u8 {
        *self as u8
    }

    /// Categories produced by platform activity rather than the company registry.
    pub fn is_journal(&self) -> bool {
        self.source() != Source::Proff
    }

    pub fn journal_categories() -> impl Iterator<Item = EventCategory> {
        Self::ALL.into_iter().filter(|c| c.is_journal())
    }
}

impl fmt::Display for EventCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for EventCategory {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.id())
    }
}

impl<'de> Deserialize<'de> for EventCategory {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let id = u8::deserialize(d)?;
        EventCategory::from_id(id)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown event category {id}")))
    }
}

/// What was done to a card.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActionType {
    Create,
    Update,
    Delete,
    /// Status change of a task between the queue, active and done boxes.
    Move,
}

impl ActionType {
    pub const ALL: [ActionType; 4] = [
        ActionType::Create,
        ActionType::Update,
        ActionType::Delete,
        ActionType::Move,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ActionType::Create => "Create",
            ActionType::Update => "Update",
            ActionType::Delete => "Delete",
            ActionType::Move => "Move",
        }
    }

    pub fn index(&self) -> usize {
        *self as usize
    }
}

impl fmt::Display for ActionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActionType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActionType::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown action type {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_contiguous_and_round_trip() {
        for (i, cat) in EventCategory::ALL.iter().enumerate() {
            assert_eq!(cat.id() as usize, i + 1);
            assert_eq!(EventCategory::from_id(cat.id()), Some(*cat));
        }
        assert_eq!(EventCategory::from_id(0), None);
        assert_eq!(EventCategory::from_id(35), None);
    }

    #[test]
    fn source_partition() {
        let expect = |range: std::ops::RangeInclusive<u8>, source: Source| {
            for id in range {
                assert_eq!(EventCategory::from_id(id).unwrap().source(), source, "id {id}");
            }
        };
        expect(1..=2, Source::Adm);
        expect(3..=5, Source::Res);
        expect(6..=9, Source::Bi);
        expect(10..=15, Source::Bm);
        expect(16..=16, Source::Gap);
        expect(17..=17, Source::Obj);
        expect(18..=18, Source::Risk);
        expect(19..=19, Source::Task);
        expect(20..=22, Source::Test);
        expect(23..=34, Source::Proff);
        assert_eq!(EventCategory::journal_categories().count(), 22);
    }

    #[test]
    fn names_follow_the_category_table() {
        assert_eq!(EventCategory::KeyMarket.name(), "Key Market");
        assert_eq!(EventCategory::from_id(12).unwrap().name(), "Product Feature");
        assert_eq!(EventCategory::from_id(33).unwrap().name(), "Registration or Bankruptcy");
        let names: std::collections::HashSet<_> =
            EventCategory::ALL.iter().map(|c| c.name()).collect();
        assert_eq!(names.len(), 34);
    }

    #[test]
    fn action_parse() {
        assert_eq!("move".parse::<ActionType>().unwrap(), ActionType::Move);
        assert!("read".parse::<ActionType>().is_err());
    }
}
