use sha2::{Digest, Sha256};

use crate::domain::{ActionType, CaseId, CategoryPayload, EventCategory, OrgNumber};
use crate::journal::JournalEvent;
use crate::platform::CaseRecord;
use crate::registry::{CompanyRecord, RegistryEvent};
use crate::time::Timestamp;
use crate::warehouse::{RecordSource, WarehouseRecord};

use super::EtlError;

/// Company identifiers as known at transform time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompanyContext {
    pub company_name: String,
    pub organization_number: OrgNumber,
    pub country: String,
    pub postcode: Option<String>,
    pub nace_code: Option<String>,
}

impl CompanyContext {
    /// Registry identifiers win over what the case owner typed; postcode and
    /// industry code only exist in the registry.
    pub fn snapshot(case: &CaseRecord, registry: Option<&CompanyRecord>) -> Option<Self> {
        let link = case.company_link.as_ref()?;
        Some(match registry {
            Some(r) => Self {
                company_name: r.company_name.clone(),
                organization_number: link.organization_number.clone(),
                country: r.country.clone(),
                postcode: Some(r.postcode.clone()),
                nace_code: Some(r.nace_code.clone()),
            },
            None => Self {
                company_name: link.company_name.clone(),
                organization_number: link.organization_number.clone(),
                country: link.country.clone(),
                postcode: None,
                nace_code: None,
            },
        })
    }
}

struct Fact<'a> {
    source: RecordSource,
    event_id: u64,
    timestamp: Timestamp,
    category: EventCategory,
    action: ActionType,
    title: String,
    description: String,
    payload: &'a CategoryPayload,
}

fn with_context(fact: Fact<'_>, case: &CaseRecord, company: Option<&CompanyContext>) -> WarehouseRecord {
    WarehouseRecord {
        source: fact.source,
        case_id: case.case_id,
        case_title: case.title.clone(),
        event_id: fact.event_id,
        timestamp: fact.timestamp,
        category: fact.category,
        action: fact.action,
        case_participant: None,
        company_name: company.map(|c| c.company_name.clone()),
        organization_number: company.map(|c| c.organization_number.as_str().to_string()),
        country: company.map(|c| c.country.clone()),
        postcode: company.and_then(|c| c.postcode.clone()),
        nace_code: company.and_then(|c| c.nace_code.clone()),
        added_by_case_role: None,
        client_id: case.settings.template_id.clone(),
        relating_to_whole_company: case.settings.relates_to_whole_company,
        event_title: fact.title,
        event_description: fact.description,
        idea_model_title: None,
        payload: fact.payload.clone(),
    }
}

/// Denormalizes one journal event with its case and company context.
pub fn transform(
    event: &JournalEvent,
    case: &CaseRecord,
    company: Option<&CompanyContext>,
) -> Result<WarehouseRecord, EtlError> {
    let participant = case.participant(&event.participant_id).ok_or(EtlError::OrphanEvent {
        event_id: event.event_id,
        case_id: event.case_id,
        reason: format!("participant {} is unknown to the case", event.participant_id),
    })?;
    let fact = Fact {
        source: RecordSource::Journal,
        event_id: event.event_id,
        timestamp: event.timestamp,
        category: event.category,
        action: event.action,
        title: event.title.clone(),
        description: event.description.clone(),
        payload: &event.payload,
    };
    let mut record = with_context(fact, case, company);
    record.case_participant = Some(event.participant_id.as_str().to_string());
    record.added_by_case_role = Some(participant.case_role);
    record.idea_model_title = case.idea_title_for(&event.card_id, event.idea_ref.as_ref());
    Ok(record)
}

/// Stable id of a registry fact as seen from one case.
pub fn registry_event_id(case_id: CaseId, event: &RegistryEvent) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(format!(
        "registry|{}|{}|{}|{}",
        case_id.0,
        event.organization_number.as_str(),
        event.category.id(),
        event.year
    ));
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(bytes) & (u64::MAX >> 1)
}

pub fn transform_registry(event: &RegistryEvent, case: &CaseRecord, company: &CompanyContext) -> WarehouseRecord {
    let fact = Fact {
        source: RecordSource::Registry,
        event_id: registry_event_id(case.case_id, event),
        timestamp: event.timestamp,
        category: event.category,
        action: ActionType::Create,
        title: event.title(),
        description: String::new(),
        payload: &event.payload,
    };
    with_context(fact, case, Some(company))
}
