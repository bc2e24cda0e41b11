use serde::{Deserialize, Serialize};

use super::{DomainError, ParticipantId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CanvasModel {
    LeanBusiness,
    #[serde(rename = "BMC")]
    Bmc,
    LeanCanvas,
}

impl CanvasModel {
    pub const ALL: [CanvasModel; 3] = [CanvasModel::LeanBusiness, CanvasModel::Bmc, CanvasModel::LeanCanvas];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaseRole {
    Entrepreneur,
    Enabler,
    Educator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ParticipantType {
    Partner,
    Employee,
}

pub const PERIOD_MONTHS: [u8; 4] = [3, 6, 9, 12];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseSettings {
    pub period_months: u8,
    pub rolling: bool,
    pub canvas_model: CanvasModel,
    /// Template the case was started from (the partner-specific client id).
    pub template_id: String,
    pub relates_to_whole_company: bool,
}

impl CaseSettings {
    pub fn validate(&self) -> Result<(), DomainError> {
        if !PERIOD_MONTHS.contains(&self.period_months) {
            return Err(DomainError::InvalidSettings(format!(
                "period_months must be one of {PERIOD_MONTHS:?}, got {}",
                self.period_months
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub participant_id: ParticipantId,
    pub name: String,
    pub case_role: CaseRole,
    pub participant_type: ParticipantType,
    pub internal: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(period_months: u8) -> CaseSettings {
        CaseSettings {
            period_months,
            rolling: false,
            canvas_model: CanvasModel::LeanBusiness,
            template_id: "full".into(),
            relates_to_whole_company: true,
        }
    }

    #[test]
    fn period_superset_is_accepted() {
        for m in PERIOD_MONTHS {
            settings(m).validate().unwrap();
        }
        for m in [0, 1, 5, 7, 24] {
            assert!(settings(m).validate().is_err(), "{m}");
        }
    }

    #[test]
    fn canvas_names_on_the_wire() {
        assert_eq!(serde_json::to_string(&CanvasModel::Bmc).unwrap(), "\"BMC\"");
        let m: CanvasModel = serde_json::from_str("\"LeanCanvas\"").unwrap();
        assert_eq!(m, CanvasModel::LeanCanvas);
    }
}
