//! Company-registry data: demographic identifiers and up to five years of
//! financials per organization number, and their conversion into year-end
//! stamped warehouse events.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::domain::{
    CategoryPayload, Currency, EventCategory, FinancialFields, OrgNumber, OrgNumberError, Quantity,
    RegistrationFields, RegistrationStatus,
};
use crate::time::{year_end, Timestamp};

/// Organization-number length of the default (Nordic) registry.
pub const DEFAULT_ORG_NUMBER_LEN: usize = 9;

/// Years of financial history a registry lookup returns.
pub const MAX_FINANCIAL_YEARS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompanyRecord {
    pub organization_number: OrgNumber,
    pub company_name: String,
    pub country: String,
    pub postcode: String,
    /// Industry nomenclature code, digits with optional dot groups (e.g. `62.010`).
    pub nace_code: String,
    pub registration_status: RegistrationStatus,
    /// Year of registration, or of bankruptcy for bankrupt companies.
    pub status_year: i32,
}

pub fn is_valid_nace_code(code: &str) -> bool {
    !code.is_empty()
        && code
            .split('.')
            .all(|group| !group.is_empty() && group.bytes().all(|b| b.is_ascii_digit()))
}

impl CompanyRecord {
    pub fn validate(&self) -> Result<(), String> {
        if !is_valid_nace_code(&self.nace_code) {
            return Err(format!("invalid NACE code {:?}", self.nace_code));
        }
        if self.company_name.trim().is_empty() {
            return Err("company name is empty".into());
        }
        Ok(())
    }
}

fn default_currency() -> Currency {
    Currency::NOK
}

/// One reporting year. Any figure may be missing; absent figures produce no event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinancialYear {
    pub year: i32,
    #[serde(default = "default_currency")]
    pub currency: Currency,
    #[serde(default)]
    pub revenue: Option<Decimal>,
    #[serde(default)]
    pub profit_loss: Option<Decimal>,
    #[serde(default)]
    pub balance_sum: Option<Decimal>,
    #[serde(default)]
    pub return_on_assets: Option<Decimal>,
    #[serde(default)]
    pub pnl_percentage: Option<Decimal>,
    #[serde(default)]
    pub return_on_equity: Option<Decimal>,
    #[serde(default)]
    pub current_ratio: Option<Decimal>,
    #[serde(default)]
    pub equity_ratio: Option<Decimal>,
    #[serde(default)]
    pub gearing: Option<Decimal>,
    #[serde(default)]
    pub employees: Option<u64>,
}

impl FinancialYear {
    pub fn empty(year: i32) -> Self {
        Self {
            year,
            currency: Currency::NOK,
            revenue: None,
            profit_loss: None,
            balance_sum: None,
            return_on_assets: None,
            pnl_percentage: None,
            return_on_equity: None,
            current_ratio: None,
            equity_ratio: None,
            gearing: None,
            employees: None,
        }
    }

    /// Present figures with the category each one is reported under.
    pub fn values(&self) -> Vec<(EventCategory, Quantity)> {
        use EventCategory as C;
        let money = |v: Decimal| Quantity::money(v, self.currency);
        let mut out = Vec::with_capacity(10);
        let currency_fields = [
            (C::Revenue, self.revenue),
            (C::ProfitLoss, self.profit_loss),
            (C::BalanceSum, self.balance_sum),
        ];
        out.extend(currency_fields.into_iter().filter_map(|(c, v)| v.map(|v| (c, money(v)))));
        let percent_fields = [
            (C::ReturnOnAssets, self.return_on_assets),
            (C::ProfitLossPercentage, self.pnl_percentage),
            (C::ReturnOnEquity, self.return_on_equity),
            (C::CurrentRatio, self.current_ratio),
            (C::EquityRatio, self.equity_ratio),
            (C::Gearing, self.gearing),
        ];
        out.extend(percent_fields.into_iter().filter_map(|(c, v)| v.map(|v| (c, Quantity::plain(v)))));
        if let Some(n) = self.employees {
            out.push((C::NumberOfEmployees, Quantity::plain(Decimal::from(n))));
        }
        out
    }

    pub fn value_of(&self, category: EventCategory) -> Option<Quantity> {
        self.values().into_iter().find(|(c, _)| *c == category).map(|(_, q)| q)
    }
}

/// At most five years, newest first, one record per year (the later row wins).
pub fn normalize_financials(rows: impl IntoIterator<Item = FinancialYear>) -> Vec<FinancialYear> {
    let mut by_year = BTreeMap::new();
    for row in rows {
        by_year.insert(row.year, row);
    }
    by_year.into_values().rev().take(MAX_FINANCIAL_YEARS).collect()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegistryError {
    #[error("malformed organization number: {0}")]
    Malformed(#[from] OrgNumberError),
    #[error("organization {0} not found in registry")]
    NotFound(OrgNumber),
    #[error("registry unavailable: {0}")]
    Unavailable(String),
    #[error("invalid registry response: {0}")]
    InvalidResponse(String),
}

/// A company registry keyed by organization number.
pub trait RegistrySource: Send + Sync {
    fn fetch_company(&self, org: &OrgNumber) -> Result<CompanyRecord, RegistryError>;

    /// Normalized financial history: at most five years, newest first.
    fn fetch_financials(&self, org: &OrgNumber) -> Result<Vec<FinancialYear>, RegistryError>;

    fn org_number_len(&self) -> usize {
        DEFAULT_ORG_NUMBER_LEN
    }

    /// Syntax check done before any lookup.
    fn parse_org_number(&self, raw: &str) -> Result<OrgNumber, RegistryError> {
        Ok(OrgNumber::parse_with_len(raw, self.org_number_len())?)
    }
}

/// One company document of a registry fixture file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureDocument {
    pub company: CompanyRecord,
    #[serde(default)]
    pub financials: Vec<FinancialYear>,
}

/// Reads a fixture file: one JSON document per line.
pub fn read_fixture_file(path: impl AsRef<Path>) -> io::Result<Vec<FixtureDocument>> {
    let reader = BufReader::new(File::open(path)?);
    let mut docs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: FixtureDocument = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("fixture line {}: {e}", idx + 1))
        })?;
        doc.company
            .validate()
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("fixture line {}: {e}", idx + 1)))?;
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_fixture_file(path: impl AsRef<Path>, docs: &[FixtureDocument]) -> io::Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    for doc in docs {
        serde_json::to_writer(&mut writer, doc)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

/// In-process registry serving a fixture snapshot.
#[derive(Debug, Clone, Default)]
pub struct FixtureRegistry {
    docs: BTreeMap<OrgNumber, FixtureDocument>,
}

impl FixtureRegistry {
    pub fn new(docs: impl IntoIterator<Item = FixtureDocument>) -> Self {
        Self {
            docs: docs
                .into_iter()
                .map(|d| (d.company.organization_number.clone(), d))
                .collect(),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> io::Result<Self> {
        Ok(Self::new(read_fixture_file(path)?))
    }

    /// The raw document as stored, financial rows unnormalized.
    pub fn document(&self, org: &OrgNumber) -> Option<&FixtureDocument> {
        self.docs.get(org)
    }

    pub fn documents(&self) -> impl Iterator<Item = &FixtureDocument> {
        self.docs.values()
    }
}

impl RegistrySource for FixtureRegistry {
    fn fetch_company(&self, org: &OrgNumber) -> Result<CompanyRecord, RegistryError> {
        self.docs
            .get(org)
            .map(|d| d.company.clone())
            .ok_or_else(|| RegistryError::NotFound(org.clone()))
    }

    fn fetch_financials(&self, org: &OrgNumber) -> Result<Vec<FinancialYear>, RegistryError> {
        self.docs
            .get(org)
            .map(|d| normalize_financials(d.financials.iter().cloned()))
            .ok_or_else(|| RegistryError::NotFound(org.clone()))
    }
}

/// A registry fact ready for the warehouse.
#[derive(Debug, Clone, PartialEq)]
pub struct RegistryEvent {
    pub organization_number: OrgNumber,
    pub category: EventCategory,
    pub year: i32,
    pub timestamp: Timestamp,
    pub payload: CategoryPayload,
}

impl RegistryEvent {
    pub fn title(&self) -> String {
        format!("{} {}", self.category.name(), self.year)
    }
}

/// One event per present yearly figure plus one status event, each stamped at
/// the last second of its year. Output is sorted by (year, category).
pub fn registry_to_events(company: &CompanyRecord, financials: &[FinancialYear]) -> Vec<RegistryEvent> {
    let org = &company.organization_number;
    let mut events = Vec::new();
    let status_category = match company.registration_status {
        RegistrationStatus::Registered => EventCategory::Registration,
        RegistrationStatus::Bankrupt => EventCategory::RegistrationOrBankruptcy,
    };
    events.push(RegistryEvent {
        organization_number: org.clone(),
        category: status_category,
        year: company.status_year,
        timestamp: year_end(company.status_year),
        payload: CategoryPayload::Registration(RegistrationFields {
            year: company.status_year,
            status: company.registration_status,
        }),
    });
    for fy in financials {
        for (category, value) in fy.values() {
            events.push(RegistryEvent {
                organization_number: org.clone(),
                category,
                year: fy.year,
                timestamp: year_end(fy.year),
                payload: CategoryPayload::Financial(FinancialFields { year: fy.year, value }),
            });
        }
    }
    events.sort_by_key(|e| (e.year, e.category));
    events
}
