//! In-process reference providers, used when a provider spec has no
//! endpoint.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::catalog::{fold_case, CatalogSnapshot, DataArtifact};
use crate::exec::Execution;
use crate::spec::{InputType, ProviderKey, Representation};

use super::payload::{Edge, PayloadItem, RepresentationPayload};
use super::{FetchError, InputBinding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinKind {
    /// Artifacts with a creation timestamp, newest first.
    RecentDocuments,
    OwnedBy,
    Badged,
    TypeIs,
    /// Tables connected through shared column names.
    NameJoinable,
    Favorites,
    EmbeddingView,
}

impl BuiltinKind {
    pub const ALL: [BuiltinKind; 7] = [
        BuiltinKind::RecentDocuments,
        BuiltinKind::OwnedBy,
        BuiltinKind::Badged,
        BuiltinKind::TypeIs,
        BuiltinKind::NameJoinable,
        BuiltinKind::Favorites,
        BuiltinKind::EmbeddingView,
    ];

    pub fn id(self) -> &'static str {
        match self {
            BuiltinKind::RecentDocuments => "recent_documents",
            BuiltinKind::OwnedBy => "owned_by",
            BuiltinKind::Badged => "badged",
            BuiltinKind::TypeIs => "type_is",
            BuiltinKind::NameJoinable => "name_joinable",
            BuiltinKind::Favorites => "favorites",
            BuiltinKind::EmbeddingView => "embedding_view",
        }
    }

    /// The input this builtin reads, if any.
    pub fn input(self) -> Option<InputType> {
        match self {
            BuiltinKind::OwnedBy => Some(InputType::UserId),
            BuiltinKind::Badged | BuiltinKind::TypeIs => Some(InputType::Text),
            BuiltinKind::NameJoinable => Some(InputType::TableId),
            _ => None,
        }
    }

    pub fn natural_representation(self) -> Representation {
        match self {
            BuiltinKind::NameJoinable => Representation::Graph,
            BuiltinKind::EmbeddingView => Representation::Embedding,
            _ => Representation::List,
        }
    }

    /// Whether this builtin can serve a provider declared with `declared`.
    /// List-shaped results can be shown as tiles as well.
    pub fn supports(self, declared: Representation) -> bool {
        let natural = self.natural_representation();
        declared == natural || (natural == Representation::List && declared == Representation::Tiles)
    }
}

/// A builtin plus an optional fixed input value, e.g. a "badged" provider
/// preset to one badge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Builtin {
    pub kind: BuiltinKind,
    pub preset: Option<String>,
}

/// Maps provider keys to builtins.
#[derive(Debug, Clone, Default)]
pub struct BuiltinTable {
    entries: HashMap<ProviderKey, Builtin>,
}

impl BuiltinTable {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: ProviderKey, kind: BuiltinKind, preset: Option<&str>) {
        self.entries.insert(key, Builtin { kind, preset: preset.map(str::to_string) });
    }

    pub fn get(&self, key: &ProviderKey) -> Option<&Builtin> {
        self.entries.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &ProviderKey> {
        self.entries.keys()
    }
}

impl BuiltinTable {
    /// The reference provider gallery.
    pub fn standard() -> Self {
        let mut table = Self::empty();
        let entries: [(&str, &str, BuiltinKind, Option<&str>); 8] = [
            ("recent", "Recent Documents", BuiltinKind::RecentDocuments, None),
            ("owned", "Owned By", BuiltinKind::OwnedBy, None),
            ("badged", "Badged", BuiltinKind::Badged, None),
            ("badged", "Endorsed", BuiltinKind::Badged, Some("endorsed")),
            ("type", "Type", BuiltinKind::TypeIs, None),
            ("joinable", "Name-Based", BuiltinKind::NameJoinable, None),
            ("favorites", "Favorites", BuiltinKind::Favorites, None),
            ("embedding", "Embedding", BuiltinKind::EmbeddingView, None),
        ];
        for (type_, name, kind, preset) in entries {
            table.insert(ProviderKey::new(type_, name), kind, preset);
        }
        table
    }
}

/// Evaluates a builtin against the catalog. The returned payload carries
/// the builtin's natural representation.
pub fn eval_builtin(
    kind: BuiltinKind,
    binding: &InputBinding,
    snapshot: &CatalogSnapshot,
    exec: Execution,
) -> Result<RepresentationPayload, FetchError> {
    eval_with_preset(&Builtin { kind, preset: None }, binding, snapshot, exec)
}

pub(crate) fn eval_with_preset(
    builtin: &Builtin,
    binding: &InputBinding,
    snapshot: &CatalogSnapshot,
    exec: Execution,
) -> Result<RepresentationPayload, FetchError> {
    let kind = builtin.kind;
    let input = match kind.input() {
        None => None,
        Some(slot) => Some(
            binding
                .get(slot)
                .or(builtin.preset.as_deref())
                .ok_or_else(|| FetchError::MissingInput { provider: None, missing: vec![slot] })?,
        ),
    };
    let artifacts: Vec<&DataArtifact> = snapshot.artifacts().collect();
    let ids = |keep: &(dyn Fn(&DataArtifact) -> bool + Sync)| -> Vec<String> {
        exec.filter(&artifacts, |a| keep(a)).into_iter().map(|a| a.id.clone()).collect()
    };

    let payload = match kind {
        BuiltinKind::RecentDocuments => {
            let mut dated: Vec<(i64, &str)> =
                artifacts.iter().filter_map(|a| a.created_at().map(|ts| (ts, a.id.as_str()))).collect();
            dated.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
            RepresentationPayload::list(Representation::List, dated.into_iter().map(|(_, id)| id))
        }
        BuiltinKind::OwnedBy => {
            let user = fold_case(input.unwrap_or_default());
            let owned = ids(&|a| a.owner().is_some_and(|o| fold_case(o) == user));
            RepresentationPayload::list(Representation::List, owned)
        }
        BuiltinKind::Badged => {
            let badge = fold_case(input.unwrap_or_default());
            let badged = ids(&|a| a.badges().iter().any(|b| fold_case(b) == badge));
            RepresentationPayload::list(Representation::List, badged)
        }
        BuiltinKind::TypeIs => {
            let kind = fold_case(input.unwrap_or_default());
            RepresentationPayload::list(Representation::List, ids(&|a| fold_case(&a.kind) == kind))
        }
        BuiltinKind::Favorites => RepresentationPayload::list(Representation::List, ids(&|a| a.is_favorite())),
        BuiltinKind::EmbeddingView => {
            let mut payload = RepresentationPayload::empty(Representation::Embedding);
            let mut positions = BTreeMap::new();
            for a in &artifacts {
                if let Some(p) = a.position {
                    payload.items.push(PayloadItem::new(a.id.clone()));
                    positions.insert(a.id.clone(), p);
                }
            }
            payload.positions = Some(positions);
            payload
        }
        BuiltinKind::NameJoinable => name_joinable(input.unwrap_or_default(), snapshot, exec)?,
    };
    Ok(payload)
}

/// The connected component of `table_id` in the graph whose edges join
/// tables sharing at least one column name (compared case-insensitively).
/// Each unordered pair yields one edge, oriented from the smaller id, and
/// labelled with the shared column names.
pub fn name_joinable(
    table_id: &str,
    snapshot: &CatalogSnapshot,
    exec: Execution,
) -> Result<RepresentationPayload, FetchError> {
    let Some(start) = snapshot.get(table_id) else {
        return Err(FetchError::DanglingArtifact { provider: None, id: table_id.to_string() });
    };
    if !start.is_table() {
        return Err(FetchError::InvalidInput {
            provider: None,
            reason: format!("\"{table_id}\" is a {}, not a table", start.kind),
        });
    }

    let tables: Vec<(&str, BTreeSet<String>)> = snapshot
        .artifacts()
        .filter(|a| a.is_table())
        .map(|a| (a.id.as_str(), a.columns.iter().flatten().map(|c| c.to_lowercase()).collect()))
        .collect();

    let pairs: Vec<(usize, usize, String)> = exec.flat_map_range(tables.len(), |i| {
        let (_, cols_i) = &tables[i];
        ((i + 1)..tables.len())
            .filter_map(|j| {
                let shared: Vec<&str> = cols_i.intersection(&tables[j].1).map(String::as_str).collect();
                (!shared.is_empty()).then(|| (i, j, shared.join(", ")))
            })
            .collect()
    });

    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); tables.len()];
    for (i, j, _) in &pairs {
        adjacency[*i].push(*j);
        adjacency[*j].push(*i);
    }
    let origin = tables.iter().position(|(id, _)| *id == table_id).expect("start is a table");
    let mut in_component = vec![false; tables.len()];
    in_component[origin] = true;
    let mut queue = VecDeque::from([origin]);
    while let Some(node) = queue.pop_front() {
        for &next in &adjacency[node] {
            if !in_component[next] {
                in_component[next] = true;
                queue.push_back(next);
            }
        }
    }

    let mut payload = RepresentationPayload::empty(Representation::Graph);
    // `tables` is in ascending id order, so i < j implies id_i < id_j.
    payload.items = (0..tables.len())
        .filter(|&i| in_component[i])
        .map(|i| PayloadItem::new(tables[i].0))
        .collect();
    payload.edges = Some(
        pairs
            .into_iter()
            .filter(|(i, _, _)| in_component[*i])
            .map(|(i, j, label)| Edge { from: tables[i].0.to_string(), to: tables[j].0.to_string(), label })
            .collect(),
    );
    Ok(payload)
}
