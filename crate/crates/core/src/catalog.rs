//! Immutable catalog snapshots of data artifacts and their metadata.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

/// Metadata field holding the owning user.
pub const OWNER_FIELD: &str = "owner";
/// Metadata field holding endorsement-style badges.
pub const BADGES_FIELD: &str = "badges";
/// Metadata field holding the creation timestamp.
pub const CREATED_AT_FIELD: &str = "created_at";
/// Metadata field marking favourites.
pub const FAVORITE_FIELD: &str = "favorite";
pub const TABLE_KIND: &str = "table";

#[derive(Debug, Clone, PartialEq)]
pub enum MetadataValue {
    Number(f64),
    Text(String),
    Boolean(bool),
    TextList(Vec<String>),
    /// UTC epoch seconds.
    Timestamp(i64),
}

impl MetadataValue {
    /// Textual values a keyword or field filter can match against.
    pub fn texts(&self) -> &[String] {
        match self {
            MetadataValue::Text(s) => std::slice::from_ref(s),
            MetadataValue::TextList(items) => items,
            _ => &[],
        }
    }

    /// Display form used when enumerating distinct field values.
    pub fn display_values(&self) -> Vec<String> {
        match self {
            MetadataValue::Number(n) => vec![n.to_string()],
            MetadataValue::Text(s) => vec![s.clone()],
            MetadataValue::Boolean(b) => vec![b.to_string()],
            MetadataValue::TextList(items) => items.clone(),
            MetadataValue::Timestamp(ts) => vec![ts.to_string()],
        }
    }

    fn validate(&self) -> Result<(), String> {
        match self {
            MetadataValue::Number(n) if !n.is_finite() => Err("number is not finite".into()),
            MetadataValue::Timestamp(ts) if *ts < 0 => Err("timestamp is negative".into()),
            _ => Ok(()),
        }
    }
}

impl Serialize for MetadataValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            MetadataValue::Number(n) => serializer.serialize_f64(*n),
            MetadataValue::Text(s) => serializer.serialize_str(s),
            MetadataValue::Boolean(b) => serializer.serialize_bool(*b),
            MetadataValue::TextList(items) => items.serialize(serializer),
            MetadataValue::Timestamp(ts) => serde_json::json!({ "ts": ts }).serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for MetadataValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        let out = match value {
            Value::Number(n) => MetadataValue::Number(n.as_f64().ok_or_else(|| D::Error::custom("bad number"))?),
            Value::String(s) => MetadataValue::Text(s),
            Value::Bool(b) => MetadataValue::Boolean(b),
            Value::Array(items) => MetadataValue::TextList(
                items
                    .into_iter()
                    .map(|v| match v {
                        Value::String(s) => Ok(s),
                        _ => Err(D::Error::custom("list values must be strings")),
                    })
                    .collect::<Result<_, _>>()?,
            ),
            Value::Object(obj) => match (obj.len(), obj.get("ts").and_then(Value::as_i64)) {
                (1, Some(ts)) => MetadataValue::Timestamp(ts),
                _ => return Err(D::Error::custom("objects must be timestamps of the form {\"ts\": <seconds>}")),
            },
            Value::Null => return Err(D::Error::custom("null metadata values are not supported")),
        };
        out.validate().map_err(D::Error::custom)?;
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataArtifact {
    pub id: String,
    pub kind: String,
    pub name: String,
    #[serde(default)]
    pub fields: BTreeMap<String, MetadataValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Position>,
}

impl DataArtifact {
    pub fn new(id: impl Into<String>, kind: impl Into<String>, name: impl Into<String>) -> Self {
        DataArtifact {
            id: id.into(),
            kind: kind.into(),
            name: name.into(),
            fields: BTreeMap::new(),
            columns: None,
            position: None,
        }
    }

    pub fn with_field(mut self, field: impl Into<String>, value: MetadataValue) -> Self {
        self.fields.insert(field.into(), value);
        self
    }

    pub fn is_table(&self) -> bool {
        self.kind == TABLE_KIND
    }

    pub fn owner(&self) -> Option<&str> {
        self.fields.get(OWNER_FIELD).and_then(|v| v.texts().first()).map(String::as_str)
    }

    pub fn badges(&self) -> &[String] {
        self.fields.get(BADGES_FIELD).map_or(&[], MetadataValue::texts)
    }

    pub fn created_at(&self) -> Option<i64> {
        match self.fields.get(CREATED_AT_FIELD) {
            Some(MetadataValue::Timestamp(ts)) => Some(*ts),
            _ => None,
        }
    }

    pub fn is_favorite(&self) -> bool {
        matches!(self.fields.get(FAVORITE_FIELD), Some(MetadataValue::Boolean(true)))
    }

    fn validate(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("id is empty".into());
        }
        if self.kind.is_empty() {
            return Err("kind is empty".into());
        }
        if let Some(p) = self.position {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err("position is not finite".into());
            }
        }
        Ok(())
    }
}

/// Folds case for case-insensitive comparisons.
pub fn fold_case(s: &str) -> String {
    s.to_uppercase().to_lowercase()
}

/// Case-insensitive substring match over name, kind and textual metadata.
/// Numbers, booleans and timestamps never match.
pub fn keyword_match(artifact: &DataArtifact, keyword: &str) -> bool {
    let needle = fold_case(keyword.trim());
    matches_folded(artifact, &needle)
}

pub(crate) fn matches_folded(artifact: &DataArtifact, needle: &str) -> bool {
    fold_case(&artifact.name).contains(needle)
        || fold_case(&artifact.kind).contains(needle)
        || artifact
            .fields
            .values()
            .flat_map(MetadataValue::texts)
            .any(|text| fold_case(text).contains(needle))
}

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("catalog syntax error: {0}")]
    Syntax(String),
    #[error("duplicate artifact id \"{0}\"")]
    DuplicateId(String),
    #[error("invalid artifact at index {index}: {message}")]
    InvalidArtifact { index: usize, message: String },
}

static NEXT_VERSION: AtomicU64 = AtomicU64::new(1);

/// An immutable set of artifacts keyed by id. Every snapshot built in this
/// process gets a fresh, strictly larger version number.
#[derive(Debug, Clone)]
pub struct CatalogSnapshot {
    artifacts: BTreeMap<String, DataArtifact>,
    version: u64,
}

impl CatalogSnapshot {
    pub fn empty() -> Self {
        CatalogSnapshot { artifacts: BTreeMap::new(), version: NEXT_VERSION.fetch_add(1, Ordering::Relaxed) }
    }

    pub fn from_artifacts(artifacts: impl IntoIterator<Item = DataArtifact>) -> Result<Self, CatalogError> {
        let mut map = BTreeMap::new();
        for (index, artifact) in artifacts.into_iter().enumerate() {
            artifact.validate().map_err(|message| CatalogError::InvalidArtifact { index, message })?;
            if map.contains_key(&artifact.id) {
                return Err(CatalogError::DuplicateId(artifact.id));
            }
            map.insert(artifact.id.clone(), artifact);
        }
        Ok(CatalogSnapshot { artifacts: map, version: NEXT_VERSION.fetch_add(1, Ordering::Relaxed) })
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn len(&self) -> usize {
        self.artifacts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.artifacts.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&DataArtifact> {
        self.artifacts.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.artifacts.contains_key(id)
    }

    /// Artifacts in ascending id order.
    pub fn artifacts(&self) -> impl Iterator<Item = &DataArtifact> {
        self.artifacts.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &String> {
        self.artifacts.keys()
    }

    /// Same artifacts, ignoring the version stamp.
    pub fn same_contents(&self, other: &CatalogSnapshot) -> bool {
        self.artifacts == other.artifacts
    }

    pub fn to_json(&self) -> String {
        let list: Vec<&DataArtifact> = self.artifacts.values().collect();
        serde_json::to_string_pretty(&list).expect("artifacts serialize")
    }
}

pub fn load_catalog(source: &[u8]) -> Result<CatalogSnapshot, CatalogError> {
    let artifacts: Vec<DataArtifact> =
        serde_json::from_slice(source).map_err(|e| CatalogError::Syntax(e.to_string()))?;
    CatalogSnapshot::from_artifacts(artifacts)
}

pub fn get_artifact<'a>(snapshot: &'a CatalogSnapshot, id: &str) -> Option<&'a DataArtifact> {
    snapshot.get(id)
}
