use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::CardId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IdeaComponent {
    KeyContribution,
    KeyMarket,
    Distinction,
}

/// A business idea assembled from cards of the three idea boxes.
/// Cards may be shared between ideas.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusinessIdea {
    pub idea_id: CardId,
    pub title: String,
    #[serde(default)]
    pub contribution_cards: BTreeSet<CardId>,
    #[serde(default)]
    pub market_cards: BTreeSet<CardId>,
    #[serde(default)]
    pub distinction_cards: BTreeSet<CardId>,
}

impl BusinessIdea {
    pub fn new(idea_id: CardId, title: impl Into<String>) -> Self {
        Self {
            idea_id,
            title: title.into(),
            contribution_cards: BTreeSet::new(),
            market_cards: BTreeSet::new(),
            distinction_cards: BTreeSet::new(),
        }
    }

    pub fn contains(&self, card: &CardId) -> bool {
        self.contribution_cards.contains(card)
            || self.market_cards.contains(card)
            || self.distinction_cards.contains(card)
    }

    pub fn cards(&self) -> impl Iterator<Item = &CardId> {
        self.contribution_cards
            .iter()
            .chain(&self.market_cards)
            .chain(&self.distinction_cards)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum IdeaValidation {
    Valid,
    MissingBoxes(Vec<IdeaComponent>),
}

/// An idea is valid when every one of its three boxes holds at least one card.
pub fn validate_business_idea(idea: &BusinessIdea) -> IdeaValidation {
    let missing: Vec<_> = [
        (IdeaComponent::KeyContribution, &idea.contribution_cards),
        (IdeaComponent::KeyMarket, &idea.market_cards),
        (IdeaComponent::Distinction, &idea.distinction_cards),
    ]
    .into_iter()
    .filter(|(_, cards)| cards.is_empty())
    .map(|(component, _)| component)
    .collect();
    if missing.is_empty() {
        IdeaValidation::Valid
    } else {
        IdeaValidation::MissingBoxes(missing)
    }
}
