//! Field names as written in queries, mapped onto artifact attributes and
//! metadata fields.

use std::collections::BTreeSet;

use crate::catalog::{fold_case, CatalogSnapshot, DataArtifact, MetadataValue, BADGES_FIELD, OWNER_FIELD};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRef<'a> {
    Kind,
    Name,
    Metadata(&'a str),
}

/// Query-language spellings that name something other than a raw
/// metadata field.
pub const FIELD_ALIASES: &[(&str, FieldRef<'static>)] = &[
    ("type", FieldRef::Kind),
    ("kind", FieldRef::Kind),
    ("name", FieldRef::Name),
    ("owned_by", FieldRef::Metadata(OWNER_FIELD)),
    ("badged_by", FieldRef::Metadata(BADGES_FIELD)),
    ("badged", FieldRef::Metadata(BADGES_FIELD)),
];

/// The names suggested for the aliases above.
const SUGGESTED_ALIASES: &[&str] = &["type", "name", "owned_by", "badged_by"];

pub fn resolve_field(name: &str) -> FieldRef<'_> {
    FIELD_ALIASES
        .iter()
        .find(|(alias, _)| *alias == name)
        .map_or(FieldRef::Metadata(name), |(_, target)| *target)
}

/// Case-insensitive equality (membership for text lists). Numbers,
/// booleans and timestamps compare against the parsed value.
pub fn field_matches(artifact: &DataArtifact, field: FieldRef<'_>, folded_value: &str, raw_value: &str) -> bool {
    match field {
        FieldRef::Kind => fold_case(&artifact.kind) == folded_value,
        FieldRef::Name => fold_case(&artifact.name) == folded_value,
        FieldRef::Metadata(key) => match artifact.fields.get(key) {
            None => false,
            Some(MetadataValue::Text(s)) => fold_case(s) == folded_value,
            Some(MetadataValue::TextList(items)) => items.iter().any(|s| fold_case(s) == folded_value),
            Some(MetadataValue::Number(n)) => raw_value.trim().parse::<f64>().is_ok_and(|v| v == *n),
            Some(MetadataValue::Boolean(b)) => folded_value.trim().parse::<bool>().is_ok_and(|v| v == *b),
            Some(MetadataValue::Timestamp(ts)) => raw_value.trim().parse::<i64>().is_ok_and(|v| v == *ts),
        },
    }
}

/// Field names a query can filter on: the aliases plus every metadata
/// field present in the catalog that no alias covers.
pub fn field_names(snapshot: &CatalogSnapshot) -> Vec<String> {
    let mut names: BTreeSet<String> = SUGGESTED_ALIASES.iter().map(|s| s.to_string()).collect();
    for artifact in snapshot.artifacts() {
        for key in artifact.fields.keys() {
            if key != OWNER_FIELD && key != BADGES_FIELD {
                names.insert(key.clone());
            }
        }
    }
    names.into_iter().collect()
}

/// Distinct values of a field across the catalog, in ascending order.
pub fn distinct_values(snapshot: &CatalogSnapshot, field: FieldRef<'_>) -> BTreeSet<String> {
    let mut values = BTreeSet::new();
    for artifact in snapshot.artifacts() {
        match field {
            FieldRef::Kind => {
                values.insert(artifact.kind.clone());
            }
            FieldRef::Name => {
                values.insert(artifact.name.clone());
            }
            FieldRef::Metadata(key) => {
                if let Some(v) = artifact.fields.get(key) {
                    values.extend(v.display_values());
                }
            }
        }
    }
    values
}
