use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::{BusinessIdea, CardId, CaseId, CaseSettings, OrgNumber, Participant, ParticipantId};
use crate::time::YearMonth;

/// Outcome of checking a case's company link against the registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkVerification {
    /// Name and country match the registry record.
    Verified,
    /// The registry knows the number but under another name or country.
    Mismatch,
    NotInRegistry,
    /// No registry configured, or it was unreachable.
    Unchecked,
}

fn default_consent() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompanyLink {
    pub company_name: String,
    pub organization_number: OrgNumber,
    pub country: String,
    #[serde(default = "default_consent")]
    pub consent: bool,
    pub verification: LinkVerification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case_id: CaseId,
    pub title: String,
    pub settings: CaseSettings,
    pub company_link: Option<CompanyLink>,
    /// Everyone who ever joined, so historic events keep resolving.
    pub participants: Vec<Participant>,
    #[serde(default)]
    pub removed_participants: BTreeSet<ParticipantId>,
    pub period_start: YearMonth,
    /// Inclusive; moves forward as a rolling case is rolled.
    pub period_end: YearMonth,
    /// Month of the last roll check.
    pub last_rolled: YearMonth,
    /// Months added to the period by rolling.
    #[serde(default)]
    pub extensions: u32,
    pub settings_card: CardId,
    #[serde(default)]
    pub ideas: BTreeMap<CardId, BusinessIdea>,
    #[serde(default)]
    pub next_card: u64,
}

impl CaseRecord {
    pub fn new(
        case_id: CaseId,
        title: impl Into<String>,
        settings: CaseSettings,
        owner: Participant,
        period_start: YearMonth,
    ) -> Self {
        let period_end = period_start.plus_months(i64::from(settings.period_months) - 1);
        Self {
            case_id,
            title: title.into(),
            settings,
            company_link: None,
            participants: vec![owner],
            removed_participants: BTreeSet::new(),
            period_start,
            period_end,
            last_rolled: period_start,
            extensions: 0,
            settings_card: CardId::new(format!("settings-{}", case_id.0)),
            ideas: BTreeMap::new(),
            next_card: 0,
        }
    }

    /// Recomputes the period end from the period length and roll extensions.
    pub fn reset_period_end(&mut self) {
        let months = i64::from(self.settings.period_months) - 1 + i64::from(self.extensions);
        self.period_end = self.period_start.plus_months(months);
    }

    pub fn is_member(&self, participant_id: &ParticipantId) -> bool {
        !self.removed_participants.contains(participant_id)
            && self.participants.iter().any(|p| &p.participant_id == participant_id)
    }

    /// Current or former participant.
    pub fn participant(&self, participant_id: &ParticipantId) -> Option<&Participant> {
        self.participants.iter().find(|p| &p.participant_id == participant_id)
    }

    pub fn contains_month(&self, month: YearMonth) -> bool {
        self.period_start <= month && month <= self.period_end
    }

    pub fn months(&self) -> impl Iterator<Item = YearMonth> {
        self.period_start.through(self.period_end)
    }

    /// Name the gap board treats as the case's own company.
    pub fn own_company_name(&self) -> &str {
        self.company_link
            .as_ref()
            .map_or(self.title.as_str(), |l| l.company_name.as_str())
    }

    pub fn allocate_card_id(&mut self) -> CardId {
        self.next_card += 1;
        CardId::new(format!("c{}-{}", self.case_id.0, self.next_card))
    }

    pub fn participant_card(participant_id: &ParticipantId) -> CardId {
        CardId::new(format!("participant-{}", participant_id.as_str()))
    }

    /// Business idea an event on `card` is attributed to: the explicit
    /// reference, the card itself when it is an idea, or the single idea
    /// holding the card. `None` when ambiguous.
    pub fn idea_title_for(&self, card: &CardId, idea_ref: Option<&CardId>) -> Option<String> {
        if let Some(idea) = idea_ref.and_then(|r| self.ideas.get(r)) {
            return Some(idea.title.clone());
        }
        if let Some(idea) = self.ideas.get(card) {
            return Some(idea.title.clone());
        }
        let mut holding = self.ideas.values().filter(|i| i.contains(card));
        match (holding.next(), holding.next()) {
            (Some(only), None) => Some(only.title.clone()),
            _ => None,
        }
    }
}

/// Platform-side case state that is not itself journaled: titles, company
/// links, consent, participants' roles, idea composition and case periods.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CaseCatalog {
    pub next_case_id: u64,
    pub cases: BTreeMap<CaseId, CaseRecord>,
}

/// Where the catalog of a journal lives: next to it, `<stem>.cases.json`.
pub fn catalog_path_for(journal_path: &Path) -> PathBuf {
    journal_path.with_extension("cases.json")
}

impl CaseCatalog {
    pub fn load(path: impl AsRef<Path>) -> io::Result<Self> {
        match fs::read(path.as_ref()) {
            Ok(bytes) => serde_json::from_slice(&bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(e),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let path = path.as_ref();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        let tmp = path.with_extension("json.tmp");
        {
            let mut writer = BufWriter::new(File::create(&tmp)?);
            serde_json::to_writer(&mut writer, self)?;
            writer.write_all(b"\n")?;
            writer.flush()?;
            writer.get_ref().sync_all()?;
        }
        fs::rename(tmp, path)
    }

    pub fn get(&self, case_id: CaseId) -> Option<&CaseRecord> {
        self.cases.get(&case_id)
    }

    pub fn insert(&mut self, record: CaseRecord) {
        self.next_case_id = self.next_case_id.max(record.case_id.0);
        self.cases.insert(record.case_id, record);
    }

    pub fn allocate_case_id(&mut self) -> CaseId {
        self.next_case_id += 1;
        CaseId(self.next_case_id)
    }
}
