use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

/// Numeric case key, stable for the life of a case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CaseId(pub u64);

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

string_id!(
    /// Opaque id of anything the journal tracks a lifecycle for: cards, ideas,
    /// settings objects, participants and test runs.
    CardId
);
string_id!(ParticipantId);

/// Registry organization number: a non-empty string of ASCII digits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct OrgNumber(String);

/// Longest organization number we accept; keeps derived ids inside 64 bits.
pub const MAX_ORG_NUMBER_LEN: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrgNumberError {
    #[error("organization number {0:?} must contain only digits")]
    NotDigits(String),
    #[error("organization number {value:?} has {actual} digits, expected {expected}")]
    WrongLength {
        value: String,
        expected: usize,
        actual: usize,
    },
}

impl OrgNumber {
    pub fn parse(raw: &str) -> Result<Self, OrgNumberError> {
        let trimmed = raw.trim();
        if trimmed.is_empty() || !trimmed.bytes().all(|b| b.is_ascii_digit()) {
            return Err(OrgNumberError::NotDigits(raw.to_string()));
        }
        if trimmed.len() > MAX_ORG_NUMBER_LEN {
            return Err(OrgNumberError::WrongLength {
                value: raw.to_string(),
                expected: MAX_ORG_NUMBER_LEN,
                actual: trimmed.len(),
            });
        }
        Ok(Self(trimmed.to_string()))
    }

    /// Parses and additionally enforces a registry-defined length.
    pub fn parse_with_len(raw: &str, len: usize) -> Result<Self, OrgNumberError> {
        let org = Self::parse(raw)?;
        if org.0.len() != len {
            return Err(OrgNumberError::WrongLength {
                value: raw.to_string(),
                expected: len,
                actual: org.0.len(),
            });
        }
        Ok(org)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for OrgNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for OrgNumber {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        OrgNumber::parse(&raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn org_number_syntax() {
        assert_eq!(OrgNumber::parse("915429785").unwrap().as_str(), "915429785");
        assert!(matches!(
            OrgNumber::parse("12AB"),
            Err(OrgNumberError::NotDigits(_))
        ));
        assert!(OrgNumber::parse("").is_err());
        assert!(OrgNumber::parse_with_len("12345", 9).is_err());
        assert!(OrgNumber::parse("1234567890123").is_err());
    }
}
