//! The declarative provider specification document: providers, ranking
//! weights and application-specific custom content.

mod relaxed;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub use relaxed::SyntaxError;

/// The custom-section field this engine understands: per-team home pages.
pub const HOME_FIELD: &str = "home";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Representation {
    Tiles,
    List,
    Hierarchy,
    Graph,
    Categories,
    Embedding,
}

impl Representation {
    pub const ALL: [Representation; 6] = [
        Representation::Tiles,
        Representation::List,
        Representation::Hierarchy,
        Representation::Graph,
        Representation::Categories,
        Representation::Embedding,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Representation::Tiles => "TILES",
            Representation::List => "LIST",
            Representation::Hierarchy => "HIERARCHY",
            Representation::Graph => "GRAPH",
            Representation::Categories => "CATEGORIES",
            Representation::Embedding => "EMBEDDING",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InputType {
    #[serde(rename = "TABLEID")]
    TableId,
    #[serde(rename = "USERID")]
    UserId,
    #[serde(rename = "TEXT")]
    Text,
}

impl InputType {
    pub const ALL: [InputType; 3] = [InputType::TableId, InputType::UserId, InputType::Text];

    pub fn as_str(self) -> &'static str {
        match self {
            InputType::TableId => "TABLEID",
            InputType::UserId => "USERID",
            InputType::Text => "TEXT",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for InputType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InputSlot {
    pub input_type: InputType,
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub field: String,
    pub weight: f64,
}

/// Field→weight multipliers, kept in declaration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RankingWeights {
    pub entries: Vec<WeightEntry>,
}

impl RankingWeights {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        RankingWeights {
            entries: entries
                .into_iter()
                .map(|(field, weight)| WeightEntry { field: field.into(), weight })
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        RankingWeights {
            entries: self
                .entries
                .iter()
                .map(|e| WeightEntry { field: e.field.clone(), weight: e.weight * factor })
                .collect(),
        }
    }
}

/// Identifies a provider: its category (`type`) plus a name unique within it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProviderKey {
    #[serde(rename = "type")]
    pub type_: String,
    pub name: String,
}

impl ProviderKey {
    pub fn new(type_: impl Into<String>, name: impl Into<String>) -> Self {
        ProviderKey { type_: type_.into(), name: name.into() }
    }
}

impl fmt::Display for ProviderKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.type_, self.name)
    }
}

/// UI surfaces a provider can be shown on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surface {
    Discovery,
    Search,
    Exploration,
}

impl Surface {
    pub const ALL: [Surface; 3] = [Surface::Discovery, Surface::Search, Surface::Exploration];

    pub fn as_str(self) -> &'static str {
        match self {
            Surface::Discovery => "discovery",
            Surface::Search => "search",
            Surface::Exploration => "exploration",
        }
    }
}

impl std::str::FromStr for Surface {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Surface::ALL
            .into_iter()
            .find(|surface| surface.as_str() == s)
            .ok_or_else(|| format!("unknown surface \"{s}\""))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderSpec {
    pub type_: String,
    pub name: String,
    pub description: String,
    pub representation: Representation,
    pub inputs: Vec<InputSlot>,
    /// Relative or absolute URL; `None` marks an in-process built-in.
    pub endpoint: Option<String>,
    pub visible: Option<BTreeMap<String, bool>>,
    pub ranking: Option<RankingWeights>,
}

impl ProviderSpec {
    pub fn key(&self) -> ProviderKey {
        ProviderKey::new(self.type_.clone(), self.name.clone())
    }

    pub fn required_inputs(&self) -> impl Iterator<Item = InputType> + '_ {
        self.inputs.iter().filter(|slot| slot.required).map(|slot| slot.input_type)
    }

    /// Visibility on `surface`; absent keys (or an absent map) mean visible.
    pub fn effective_visibility(&self, surface: Surface) -> bool {
        effective_visibility(self, surface)
    }
}

pub fn effective_visibility(spec: &ProviderSpec, surface: Surface) -> bool {
    spec.visible
        .as_ref()
        .and_then(|map| map.get(surface.as_str()).copied())
        .unwrap_or(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamPage {
    pub name: String,
    pub data: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CustomContent {
    pub field: String,
    pub content: Vec<TeamPage>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpecDocument {
    pub providers: Vec<ProviderSpec>,
    pub global_ranking: Option<RankingWeights>,
    pub custom: Vec<CustomContent>,
    /// Custom sections whose field this engine does not support; kept so a
    /// document survives a parse/serialize cycle untouched.
    pub unsupported_custom: Vec<Value>,
    /// Unknown top-level keys, retained verbatim.
    pub extra: Map<String, Value>,
}

impl SpecDocument {
    pub fn provider(&self, key: &ProviderKey) -> Option<&ProviderSpec> {
        self.providers.iter().find(|p| p.type_ == key.type_ && p.name == key.name)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("syntax error: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
}

impl SpecError {
    fn schema(path: &str, message: impl Into<String>) -> Self {
        SpecError::Schema { path: path.to_string(), message: message.into() }
    }
}

/// Parses a specification document.
///
/// Besides a full `{"providers": [...], "ranking": [...], "custom": [...]}`
/// document, a single provider object or a bare top-level member list such
/// as `"ranking": [...]` is accepted.
pub fn parse_spec(text: &[u8]) -> Result<SpecDocument, SpecError> {
    let text = std::str::from_utf8(text).map_err(|e| {
        SpecError::Syntax(SyntaxError { line: 1, column: e.valid_up_to() + 1, message: "invalid UTF-8".into() })
    })?;
    let value = relaxed::parse(text)?;
    let Value::Object(mut top) = value else {
        return Err(SpecError::schema("$", "expected an object"));
    };

    let is_single_provider = !top.contains_key("providers")
        && !top.contains_key("ranking")
        && !top.contains_key("custom")
        && top.contains_key("representation");
    if is_single_provider {
        let provider = decode_provider(&Value::Object(top), "providers[0]")?;
        return Ok(SpecDocument { providers: vec![provider], ..Default::default() });
    }

    let mut doc = SpecDocument::default();
    if let Some(providers) = top.shift_remove("providers") {
        let items = providers
            .as_array()
            .ok_or_else(|| SpecError::schema("providers", "expected an array"))?;
        for (i, item) in items.iter().enumerate() {
            doc.providers.push(decode_provider(item, &format!("providers[{i}]"))?);
        }
    }
    if let Some(ranking) = top.shift_remove("ranking") {
        doc.global_ranking = Some(decode_ranking(&ranking, "ranking")?);
    }
    if let Some(custom) = top.shift_remove("custom") {
        let items = custom.as_array().ok_or_else(|| SpecError::schema("custom", "expected an array"))?;
        for (i, item) in items.iter().enumerate() {
            match decode_custom(item, &format!("custom[{i}]"))? {
                Some(content) => doc.custom.push(content),
                None => doc.unsupported_custom.push(item.clone()),
            }
        }
    }
    doc.extra = top;
    Ok(doc)
}

const PROVIDER_KEYS: [&str; 8] =
    ["type", "name", "description", "representation", "input", "endpoint", "visible", "ranking"];

fn decode_provider(value: &Value, path: &str) -> Result<ProviderSpec, SpecError> {
    let obj = value.as_object().ok_or_else(|| SpecError::schema(path, "expected an object"))?;
    if let Some(unknown) = obj.keys().find(|k| !PROVIDER_KEYS.contains(&k.as_str())) {
        return Err(SpecError::schema(&format!("{path}.{unknown}"), "unknown provider key"));
    }
    let type_ = required_str(obj, path, "type")?;
    let name = required_str(obj, path, "name")?;
    let description = optional_str(obj, path, "description")?.unwrap_or_default();

    let repr_path = format!("{path}.representation");
    let repr_raw = required_str(obj, path, "representation")?;
    let representation = Representation::parse(&repr_raw)
        .ok_or_else(|| SpecError::schema(&repr_path, format!("unknown representation \"{repr_raw}\"")))?;

    let mut inputs = Vec::new();
    if let Some(raw) = obj.get("input") {
        let input_path = format!("{path}.input");
        let items = raw.as_array().ok_or_else(|| SpecError::schema(&input_path, "expected an array"))?;
        for (i, item) in items.iter().enumerate() {
            let slot_path = format!("{input_path}[{i}]");
            let slot = item.as_object().ok_or_else(|| SpecError::schema(&slot_path, "expected an object"))?;
            if let Some(unknown) = slot.keys().find(|k| *k != "type" && *k != "required") {
                return Err(SpecError::schema(&format!("{slot_path}.{unknown}"), "unknown input key"));
            }
            let raw_type = required_str(slot, &slot_path, "type")?;
            let input_type = InputType::parse(&raw_type).ok_or_else(|| {
                SpecError::schema(&format!("{slot_path}.type"), format!("unknown input type \"{raw_type}\""))
            })?;
            let required = match slot.get("required") {
                None => false,
                Some(Value::Bool(b)) => *b,
                Some(_) => return Err(SpecError::schema(&format!("{slot_path}.required"), "expected a boolean")),
            };
            inputs.push(InputSlot { input_type, required });
        }
    }

    let endpoint = optional_str(obj, path, "endpoint")?;

    let visible = match obj.get("visible") {
        None => None,
        Some(raw) => {
            let vis_path = format!("{path}.visible");
            let map = raw.as_object().ok_or_else(|| SpecError::schema(&vis_path, "expected an object"))?;
            let mut out = BTreeMap::new();
            for (k, v) in map {
                let flag = v
                    .as_bool()
                    .ok_or_else(|| SpecError::schema(&format!("{vis_path}.{k}"), "expected a boolean"))?;
                out.insert(k.clone(), flag);
            }
            Some(out)
        }
    };

    let ranking = match obj.get("ranking") {
        None => None,
        Some(raw) => Some(decode_ranking(raw, &format!("{path}.ranking"))?),
    };

    Ok(ProviderSpec { type_, name, description, representation, inputs, endpoint, visible, ranking })
}

fn decode_ranking(value: &Value, path: &str) -> Result<RankingWeights, SpecError> {
    let items = value.as_array().ok_or_else(|| SpecError::schema(path, "expected an array"))?;
    let mut entries = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let entry_path = format!("{path}[{i}]");
        let obj = item.as_object().ok_or_else(|| SpecError::schema(&entry_path, "expected an object"))?;
        if let Some(unknown) = obj.keys().find(|k| *k != "field" && *k != "weight") {
            return Err(SpecError::schema(&format!("{entry_path}.{unknown}"), "unknown ranking key"));
        }
        let field = required_str(obj, &entry_path, "field")?;
        let weight = obj
            .get("weight")
            .ok_or_else(|| SpecError::schema(&format!("{entry_path}.weight"), "missing required key"))?
            .as_f64()
            .filter(|w| w.is_finite())
            .ok_or_else(|| SpecError::schema(&format!("{entry_path}.weight"), "expected a finite number"))?;
        entries.push(WeightEntry { field, weight });
    }
    Ok(RankingWeights { entries })
}

/// Returns `None` for sections this engine does not support.
fn decode_custom(value: &Value, path: &str) -> Result<Option<CustomContent>, SpecError> {
    let Some(obj) = value.as_object() else { return Ok(None) };
    match obj.get("field").and_then(Value::as_str) {
        Some(HOME_FIELD) => {}
        _ => return Ok(None),
    }
    let content_path = format!("{path}.content");
    let items = obj
        .get("content")
        .ok_or_else(|| SpecError::schema(&content_path, "missing required key"))?
        .as_array()
        .ok_or_else(|| SpecError::schema(&content_path, "expected an array"))?;
    let mut content = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let page_path = format!("{content_path}[{i}]");
        let page = item.as_object().ok_or_else(|| SpecError::schema(&page_path, "expected an object"))?;
        let name = required_str(page, &page_path, "name")?;
        let data_path = format!("{page_path}.data");
        let data = page
            .get("data")
            .ok_or_else(|| SpecError::schema(&data_path, "missing required key"))?
            .as_array()
            .ok_or_else(|| SpecError::schema(&data_path, "expected an array"))?
            .iter()
            .enumerate()
            .map(|(j, v)| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| SpecError::schema(&format!("{data_path}[{j}]"), "expected a string"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        content.push(TeamPage { name, data });
    }
    Ok(Some(CustomContent { field: HOME_FIELD.to_string(), content }))
}

fn required_str(obj: &Map<String, Value>, path: &str, key: &str) -> Result<String, SpecError> {
    optional_str(obj, path, key)?.ok_or_else(|| SpecError::schema(&format!("{path}.{key}"), "missing required key"))
}

fn optional_str(obj: &Map<String, Value>, path: &str, key: &str) -> Result<Option<String>, SpecError> {
    match obj.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(SpecError::schema(&format!("{path}.{key}"), "expected a string")),
    }
}

/// Serializes a document as strict, pretty-printed JSON in the same shape
/// [`parse_spec`] reads.
pub fn serialize_spec(doc: &SpecDocument) -> String {
    let mut top = Map::new();
    top.insert("providers".into(), Value::Array(doc.providers.iter().map(provider_to_value).collect()));
    if let Some(ranking) = &doc.global_ranking {
        top.insert("ranking".into(), ranking_to_value(ranking));
    }
    if !doc.custom.is_empty() || !doc.unsupported_custom.is_empty() {
        let mut custom: Vec<Value> = doc
            .custom
            .iter()
            .map(|c| {
                serde_json::json!({
                    "field": c.field,
                    "content": c.content,
                })
            })
            .collect();
        custom.extend(doc.unsupported_custom.iter().cloned());
        top.insert("custom".into(), Value::Array(custom));
    }
    for (k, v) in &doc.extra {
        top.insert(k.clone(), v.clone());
    }
    serde_json::to_string_pretty(&Value::Object(top)).expect("JSON values always serialize")
}

pub fn provider_to_value(p: &ProviderSpec) -> Value {
    let mut obj = Map::new();
    obj.insert("type".into(), p.type_.clone().into());
    obj.insert("name".into(), p.name.clone().into());
    obj.insert("description".into(), p.description.clone().into());
    obj.insert("representation".into(), p.representation.as_str().into());
    obj.insert(
        "input".into(),
        Value::Array(
            p.inputs
                .iter()
                .map(|s| serde_json::json!({"type": s.input_type.as_str(), "required": s.required}))
                .collect(),
        ),
    );
    if let Some(endpoint) = &p.endpoint {
        obj.insert("endpoint".into(), endpoint.clone().into());
    }
    if let Some(visible) = &p.visible {
        obj.insert(
            "visible".into(),
            Value::Object(visible.iter().map(|(k, v)| (k.clone(), Value::Bool(*v))).collect()),
        );
    }
    if let Some(ranking) = &p.ranking {
        obj.insert("ranking".into(), ranking_to_value(ranking));
    }
    Value::Object(obj)
}

fn ranking_to_value(r: &RankingWeights) -> Value {
    serde_json::to_value(&r.entries).expect("weights are finite")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[serde(tag = "kind")]
pub enum Violation {
    #[error("provider {key} is declared more than once")]
    DuplicateProviderName { key: ProviderKey },
    #[error("provider {key} has an empty endpoint")]
    EmptyEndpoint { key: ProviderKey },
    #[error("{path} must not be empty")]
    EmptyIdentifier { path: String },
    #[error("{path}.field must not be empty")]
    EmptyRankingField { path: String },
    #[error("{path}: field \"{field}\" is weighted twice")]
    DuplicateRankingField { path: String, field: String },
}

/// Semantic checks that the parser does not perform. An empty result means
/// the document is valid.
pub fn validate_spec(doc: &SpecDocument) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    for (i, p) in doc.providers.iter().enumerate() {
        if p.type_.trim().is_empty() {
            violations.push(Violation::EmptyIdentifier { path: format!("providers[{i}].type") });
        }
        if p.name.trim().is_empty() {
            violations.push(Violation::EmptyIdentifier { path: format!("providers[{i}].name") });
        }
        if !seen.insert(p.key()) {
            violations.push(Violation::DuplicateProviderName { key: p.key() });
        }
        if p.endpoint.as_deref().is_some_and(|e| e.trim().is_empty()) {
            violations.push(Violation::EmptyEndpoint { key: p.key() });
        }
        if let Some(ranking) = &p.ranking {
            check_weights(ranking, &format!("providers[{i}].ranking"), &mut violations);
        }
    }
    if let Some(ranking) = &doc.global_ranking {
        check_weights(ranking, "ranking", &mut violations);
    }
    violations
}

fn check_weights(weights: &RankingWeights, path: &str, out: &mut Vec<Violation>) {
    let mut fields = HashSet::new();
    for (i, entry) in weights.entries.iter().enumerate() {
        if entry.field.is_empty() {
            out.push(Violation::EmptyRankingField { path: format!("{path}[{i}]") });
        } else if !fields.insert(entry.field.as_str()) {
            out.push(Violation::DuplicateRankingField { path: format!("{path}[{i}]"), field: entry.field.clone() });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum ContentWarning {
    UnresolvedReference { team: String, provider: String },
    AmbiguousReference { team: String, provider: String, candidates: Vec<ProviderKey> },
    DuplicateTeamPage { team: String },
}

#[derive(Debug, Clone, Default)]
pub struct ResolvedContent<'a> {
    pub pages: BTreeMap<String, Vec<&'a ProviderSpec>>,
    pub warnings: Vec<ContentWarning>,
}

/// Resolves the provider names on each team home page.
///
/// Unresolved names are dropped with a warning. When several providers of
/// different categories share a name, the first one in document order wins.
pub fn resolve_custom_content(doc: &SpecDocument) -> ResolvedContent<'_> {
    let mut by_name: HashMap<&str, Vec<&ProviderSpec>> = HashMap::new();
    for p in &doc.providers {
        by_name.entry(p.name.as_str()).or_default().push(p);
    }
    let mut out = ResolvedContent::default();
    for page in doc.custom.iter().filter(|c| c.field == HOME_FIELD).flat_map(|c| &c.content) {
        let mut resolved = Vec::with_capacity(page.data.len());
        for reference in &page.data {
            match by_name.get(reference.as_str()).map(Vec::as_slice) {
                None | Some([]) => out.warnings.push(ContentWarning::UnresolvedReference {
                    team: page.name.clone(),
                    provider: reference.clone(),
                }),
                Some([only]) => resolved.push(*only),
                Some(many) => {
                    out.warnings.push(ContentWarning::AmbiguousReference {
                        team: page.name.clone(),
                        provider: reference.clone(),
                        candidates: many.iter().map(|p| p.key()).collect(),
                    });
                    resolved.push(many[0]);
                }
            }
        }
        if out.pages.insert(page.name.clone(), resolved).is_some() {
            out.warnings.push(ContentWarning::DuplicateTeamPage { team: page.name.clone() });
        }
    }
    out
}
