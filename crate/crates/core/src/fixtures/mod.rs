//! Seeded synthetic data: platform journals with exact per-category counts, and
//! registry documents for the companies those journals link to.

mod journal_gen;
mod registry_gen;
mod spec;

pub use journal_gen::{generate_journal, GeneratedJournal};
pub use registry_gen::{fixture_company_identity, generate_registry_fixture};
pub use spec::{ActionCounts, FixtureSpec, Period, TABLE5_CASES, TABLE5_COUNTS};

use crate::journal::JournalError;

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("infeasible fixture: {0}")]
    InfeasibleCounts(String),
    #[error("invalid fixture spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("generated event rejected: {0}")]
    Journal(#[from] JournalError),
}
