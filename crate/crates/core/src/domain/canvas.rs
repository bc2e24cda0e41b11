use serde::{Deserialize, Serialize};

use super::{CanvasModel, DomainError};

/// Row-wise correspondence between the three canvas models, columns ordered
/// LeanBusiness, BMC, LeanCanvas. `None` marks a field with no counterpart.
pub const CANVAS_TABLE: [[Option<&str>; 3]; 12] = [
    [Some("key contribution"), None, Some("problem")],
    [Some("key market"), Some("customer segments"), Some("customer segments")],
    [Some("distinction"), None, Some("unfair advantage")],
    [Some("early market customers"), None, None],
    [Some("unique value proposition"), Some("value proposition"), Some("unique value proposition")],
    [Some("product features"), None, Some("solution")],
    [Some("partners"), Some("key partners"), None],
    [Some("how the Startups sell"), Some("channels"), Some("channels")],
    [Some("how the Startups get paid"), Some("revenue streams"), Some("revenue streams")],
    [None, None, Some("key metrics")],
    [None, Some("key activities"), None],
    [None, Some("relationships"), None],
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanvasField {
    pub model: CanvasModel,
    pub field_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CanvasMapping {
    Field(CanvasField),
    NoMatch,
}

fn column(model: CanvasModel) -> usize {
    match model {
        CanvasModel::LeanBusiness => 0,
        CanvasModel::Bmc => 1,
        CanvasModel::LeanCanvas => 2,
    }
}

impl CanvasModel {
    pub fn fields(self) -> impl Iterator<Item = &'static str> {
        CANVAS_TABLE.iter().filter_map(move |row| row[column(self)])
    }
}

/// Maps a field of one canvas model onto its counterpart in another.
pub fn map_canvas_field(
    from: CanvasModel,
    field_name: &str,
    to: CanvasModel,
) -> Result<CanvasMapping, DomainError> {
    let wanted = field_name.trim();
    let row = CANVAS_TABLE
        .iter()
        .find(|row| row[column(from)].is_some_and(|f| f.eq_ignore_ascii_case(wanted)))
        .ok_or_else(|| DomainError::UnknownField {
            model: from,
            field: field_name.to_string(),
        })?;
    Ok(match row[column(to)] {
        Some(name) => CanvasMapping::Field(CanvasField {
            model: to,
            field_name: name.to_string(),
        }),
        None => CanvasMapping::NoMatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(model: CanvasModel, name: &str) -> CanvasMapping {
        CanvasMapping::Field(CanvasField {
            model,
            field_name: name.into(),
        })
    }

    #[test]
    fn examples() {
        use CanvasModel::*;
        assert_eq!(map_canvas_field(Bmc, "customer segments", LeanBusiness).unwrap(), field(LeanBusiness, "key market"));
        assert_eq!(map_canvas_field(LeanCanvas, "key metrics", LeanBusiness).unwrap(), CanvasMapping::NoMatch);
        assert_eq!(map_canvas_field(LeanBusiness, "key market", LeanBusiness).unwrap(), field(LeanBusiness, "key market"));
    }

    #[test]
    fn unknown_field() {
        assert!(matches!(
            map_canvas_field(CanvasModel::Bmc, "problem", CanvasModel::LeanCanvas),
            Err(DomainError::UnknownField { .. })
        ));
    }

    #[test]
    fn field_names_are_unique_per_model() {
        for model in CanvasModel::ALL {
            let names: Vec<_> = model.fields().collect();
            let unique: std::collections::HashSet<_> = names.iter().collect();
            assert_eq!(names.len(), unique.len());
        }
    }
}
