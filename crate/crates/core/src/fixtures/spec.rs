use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::Deserialize;

use crate::domain::{ActionType, EventCategory};

use super::FixtureError;

/// Exact event counts of one category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionCounts {
    #[serde(default)]
    pub create: u64,
    #[serde(default)]
    pub update: u64,
    #[serde(default)]
    pub delete: u64,
    #[serde(default, rename = "move")]
    pub moves: u64,
}

impl ActionCounts {
    pub const fn new(create: u64, update: u64, delete: u64) -> Self {
        Self {
            create,
            update,
            delete,
            moves: 0,
        }
    }

    pub fn get(&self, action: ActionType) -> u64 {
        match action {
            ActionType::Create => self.create,
            ActionType::Update => self.update,
            ActionType::Delete => self.delete,
            ActionType::Move => self.moves,
        }
    }

    pub fn total(&self) -> u64 {
        self.create + self.update + self.delete + self.moves
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub struct Period {
    #[serde(deserialize_with = "toml_date")]
    pub start: NaiveDate,
    /// Inclusive.
    #[serde(deserialize_with = "toml_date")]
    pub end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureSpec {
    pub seed: u64,
    pub cases: u32,
    pub period: Period,
    /// Exact per-category counts; random activity when absent.
    pub counts: Option<BTreeMap<EventCategory, ActionCounts>>,
    /// The first this many cases are linked to registry companies.
    pub linked_companies: u32,
    /// Seed of the registry fixture the linked companies come from.
    pub registry_seed: u64,
}

/// Per-category Create/Update/Delete counts of the reference dataset, in
/// category order 1 through 22.
pub const TABLE5_COUNTS: [(u8, ActionCounts); 22] = [
    (1, ActionCounts::new(2688, 64, 783)),
    (2, ActionCounts::new(1194, 8565, 49)),
    (3, ActionCounts::new(1486, 458, 180)),
    (4, ActionCounts::new(804, 334, 99)),
    (5, ActionCounts::new(926, 298, 95)),
    (6, ActionCounts::new(1317, 2106, 239)),
    (7, ActionCounts::new(3356, 1922, 542)),
    (8, ActionCounts::new(2754, 818, 357)),
    (9, ActionCounts::new(3266, 1385, 549)),
    (10, ActionCounts::new(1478, 376, 164)),
    (11, ActionCounts::new(1316, 517, 200)),
    (12, ActionCounts::new(3650, 690, 1021)),
    (13, ActionCounts::new(3297, 740, 790)),
    (14, ActionCounts::new(1696, 324, 177)),
    (15, ActionCounts::new(1091, 229, 125)),
    (16, ActionCounts::new(3367, 1119, 286)),
    (17, ActionCounts::new(2568, 3275, 577)),
    (18, ActionCounts::new(929, 364, 65)),
    (19, ActionCounts::new(4324, 5421, 748)),
    (20, ActionCounts::new(354, 135, 69)),
    (21, ActionCounts::new(67, 40, 9)),
    (22, ActionCounts::new(40, 22, 2)),
];

pub const TABLE5_CASES: u32 = 1377;

/// Accepts a bare TOML date (`2017-02-01`) as well as a quoted one.
fn toml_date<'de, D: serde::Deserializer<'de>>(de: D) -> Result<NaiveDate, D::Error> {
    let text = match toml::Value::deserialize(de)? {
        toml::Value::String(s) => s,
        toml::Value::Datetime(d) => d.to_string(),
        other => return Err(serde::de::Error::custom(format!("expected a date, found {other}"))),
    };
    text.parse().map_err(serde::de::Error::custom)
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}

impl FixtureSpec {
    /// The reference dataset: 1377 cases, 2017-02-01 through 2017-05-15.
    pub fn table5(seed: u64) -> Self {
        Self {
            seed,
            cases: TABLE5_CASES,
            period: Period {
                start: date(2017, 2, 1),
                end: date(2017, 5, 15),
            },
            counts: Some(
                TABLE5_COUNTS
                    .iter()
                    .map(|(id, c)| (EventCategory::from_id(*id).expect("journal category"), *c))
                    .collect(),
            ),
            linked_companies: 0,
            registry_seed: seed,
        }
    }

    /// Random activity over `cases` cases in the same period as the reference dataset.
    pub fn random(seed: u64, cases: u32) -> Self {
        Self {
            counts: None,
            cases,
            ..Self::table5(seed)
        }
    }

    /// Parses a TOML spec. `preset = "table5"` starts from the reference
    /// dataset; other keys override it.
    pub fn parse(text: &str) -> Result<Self, FixtureError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            preset: Option<String>,
            seed: Option<u64>,
            cases: Option<u32>,
            period: Option<Period>,
            counts: Option<BTreeMap<String, ActionCounts>>,
            linked_companies: Option<u32>,
            registry_seed: Option<u64>,
        }
        let raw: Raw = toml::from_str(text).map_err(|e| FixtureError::InvalidSpec(e.to_string()))?;
        let seed = raw.seed.unwrap_or(0);
        let mut spec = match raw.preset.as_deref() {
            Some("table5") => Self::table5(seed),
            Some(other) => return Err(FixtureError::InvalidSpec(format!("unknown preset {other:?}"))),
            None => Self::random(seed, 1),
        };
        if let Some(cases) = raw.cases {
            spec.cases = cases;
        }
        if let Some(period) = raw.period {
            spec.period = period;
        }
        if let Some(counts) = raw.counts {
            let mut parsed = BTreeMap::new();
            for (key, c) in counts {
                let category = key
                    .parse::<u8>()
                    .ok()
                    .and_then(EventCategory::from_id)
                    .ok_or_else(|| FixtureError::InvalidSpec(format!("counts key {key:?} is not a category id")))?;
                parsed.insert(category, c);
            }
            spec.counts = Some(parsed);
        }
        spec.linked_companies = raw.linked_companies.unwrap_or(spec.linked_companies);
        spec.registry_seed = raw.registry_seed.unwrap_or(seed);
        Ok(spec)
    }

    /// A spec file path, or the literal `table5` for the built-in preset.
    pub fn load(source: &str) -> Result<Self, FixtureError> {
        if source == "table5" {
            return Ok(Self::table5(0));
        }
        let text = std::fs::read_to_string(Path::new(source))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), FixtureError> {
        let infeasible = |m: String| Err(FixtureError::InfeasibleCounts(m));
        if self.cases == 0 {
            return infeasible("at least one case is needed".into());
        }
        if self.period.end < self.period.start {
            return infeasible("period ends before it starts".into());
        }
        if self.linked_companies > self.cases {
            return infeasible("more linked companies than cases".into());
        }
        let Some(counts) = &self.counts else { return Ok(()) };
        for (category, c) in counts {
            if !category.is_journal() {
                return infeasible(format!("category {} is not a platform category", category.id()));
            }
            if c.delete > c.create {
                return infeasible(format!(
                    "category {}: {} deletes but only {} creates",
                    category.id(),
                    c.delete,
                    c.create
                ));
            }
            if c.create == 0 && c.total() > 0 {
                return infeasible(format!("category {}: actions without any create", category.id()));
            }
            if c.moves > 0 && *category != EventCategory::Task {
                return infeasible(format!("category {}: only tasks can move", category.id()));
            }
        }
        Ok(())
    }
}
