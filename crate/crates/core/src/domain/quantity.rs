use std::fmt;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// ISO-4217 alphabetic currency code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Currency([u8; 3]);

impl Currency {
    pub const NOK: Currency = Currency(*b"NOK");

    pub fn parse(code: &str) -> Option<Self> {
        let bytes = code.as_bytes();
        (bytes.len() == 3 && bytes.iter().all(u8::is_ascii_uppercase))
            .then(|| Currency([bytes[0], bytes[1], bytes[2]]))
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("ascii")
    }
}

impl fmt::Display for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Currency {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Currency {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        Currency::parse(&raw)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid currency code {raw:?}")))
    }
}

/// A decimal amount, optionally in a currency. Counts and percentages carry no code.
///
/// Text form is `"<amount>"` or `"<amount> <CODE>"`, e.g. `"50000 NOK"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Quantity {
    pub amount: Decimal,
    pub currency: Option<Currency>,
}

impl Quantity {
    pub fn money(amount: Decimal, currency: Currency) -> Self {
        Self {
            amount,
            currency: Some(currency),
        }
    }

    pub fn plain(amount: Decimal) -> Self {
        Self {
            amount,
            currency: None,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.amount.is_sign_negative() && !self.amount.is_zero()
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.currency {
            Some(code) => write!(f, "{} {}", self.amount, code),
            None => write!(f, "{}", self.amount),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid quantity {0:?}, expected \"<amount>\" or \"<amount> <ISO-4217 code>\"")]
pub struct QuantityParseError(String);

impl FromStr for Quantity {
    type Err = QuantityParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || QuantityParseError(s.to_string());
        let mut parts = s.split_whitespace();
        let amount: Decimal = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
        let currency = match parts.next() {
            Some(code) => Some(Currency::parse(code).ok_or_else(err)?),
            None => None,
        };
        if parts.next().is_some() {
            return Err(err());
        }
        Ok(Quantity { amount, currency })
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let q: Quantity = "50000 NOK".parse().unwrap();
        assert_eq!(q, Quantity::money(Decimal::from(50000), Currency::NOK));
        assert_eq!(q.to_string(), "50000 NOK");
        let p: Quantity = "12.5".parse().unwrap();
        assert_eq!(p.currency, None);
        assert!("12 nok".parse::<Quantity>().is_err());
        assert!("abc".parse::<Quantity>().is_err());
        assert!("1 NOK extra".parse::<Quantity>().is_err());
    }

    #[test]
    fn negative_zero_is_not_negative() {
        assert!(!Quantity::plain(Decimal::ZERO).is_negative());
        assert!(Quantity::plain(Decimal::from(-1)).is_negative());
    }
}
