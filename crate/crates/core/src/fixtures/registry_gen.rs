use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;

use crate::domain::{Currency, OrgNumber, RegistrationStatus};
use crate::registry::{normalize_financials, CompanyRecord, FinancialYear, FixtureDocument};

const NAME_STEMS: [&str; 12] = [
    "Fjord", "Nord", "Havbris", "Lysfjell", "Skog", "Bre", "Elv", "Vidde", "Kyst", "Stein", "Myr", "Tind",
];
const NAME_TAILS: [&str; 6] = ["Teknologi", "Design", "Mat", "Energi", "Helse", "Marin"];
const NACE_CODES: [&str; 8] = ["62.010", "71.129", "10.200", "35.110", "86.230", "03.211", "73.110", "58.290"];

fn company_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// The registry identity of fixture company `index`. Journal fixtures link
/// cases to the same identities, so both sides agree on organization numbers.
pub fn fixture_company_identity(seed: u64, index: usize) -> CompanyRecord {
    let number = 800_000_000 + (seed.wrapping_mul(1_000_003).wrapping_add(index as u64)) % 199_999_999;
    let mut rng = company_rng(seed, index);
    let stem = NAME_STEMS.choose(&mut rng).expect("non-empty");
    let tail = NAME_TAILS.choose(&mut rng).expect("non-empty");
    let bankrupt = rng.gen_bool(0.1);
    CompanyRecord {
        organization_number: OrgNumber::parse(&number.to_string()).expect("nine digits"),
        company_name: format!("{stem} {tail} {} AS", index + 1),
        country: "NO".into(),
        postcode: format!("{:04}", rng.gen_range(1..=9999)),
        nace_code: NACE_CODES.choose(&mut rng).expect("non-empty").to_string(),
        registration_status: if bankrupt { RegistrationStatus::Bankrupt } else { RegistrationStatus::Registered },
        status_year: rng.gen_range(2008..=2016),
    }
}

fn maybe(rng: &mut ChaCha8Rng, value: Decimal) -> Option<Decimal> {
    rng.gen_bool(0.85).then_some(value)
}

fn ratio(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Option<Decimal> {
    let value = Decimal::new(rng.gen_range(lo..=hi), 2);
    maybe(rng, value)
}

fn random_year(rng: &mut ChaCha8Rng, year: i32) -> FinancialYear {
    let revenue = Decimal::from(rng.gen_range(0..=50_000i64) * 1000);
    let profit_loss = Decimal::from(rng.gen_range(-5_000..=10_000i64) * 1000);
    let balance_sum = Decimal::from(rng.gen_range(100..=40_000i64) * 1000);
    FinancialYear {
        year,
        currency: Currency::NOK,
        revenue: maybe(rng, revenue),
        profit_loss: maybe(rng, profit_loss),
        balance_sum: maybe(rng, balance_sum),
        return_on_assets: ratio(rng, -3000, 3000),
        pnl_percentage: ratio(rng, -5000, 5000),
        return_on_equity: ratio(rng, -8000, 8000),
        current_ratio: ratio(rng, 10, 500),
        equity_ratio: ratio(rng, -2000, 9000),
        gearing: ratio(rng, 0, 900),
        employees: rng.gen_bool(0.85).then(|| rng.gen_range(0..=250)),
    }
}

/// Seeded registry documents for fixture companies `0..companies`. Each gets
/// one to five consecutive reporting years ending within `years` (default
/// 2012 through 2016), each figure present with high probability.
pub fn generate_registry_fixture(
    seed: u64,
    companies: usize,
    years: Option<RangeInclusive<i32>>,
) -> Vec<FixtureDocument> {
    let years = years.unwrap_or(2012..=2016);
    (0..companies)
        .map(|index| {
            let company = fixture_company_identity(seed, index);
            let mut rng = company_rng(seed.wrapping_add(1), index);
            let span = (years.end() - years.start() + 1).max(1);
            let count = rng.gen_range(1..=span.min(5));
            let last = *years.end();
            let financials: Vec<_> = (0..count).map(|k| random_year(&mut rng, last - k)).collect();
            FixtureDocument {
                company,
                financials: normalize_financials(financials),
            }
        })
        .collect()
}
