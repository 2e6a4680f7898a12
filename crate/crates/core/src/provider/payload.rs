use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Deserializer, Serialize};

use crate::catalog::{CatalogSnapshot, Position};
use crate::spec::Representation;

/// One artifact reference in a payload, with free-form annotations the UI
/// may display.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PayloadItem {
    pub id: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub annotations: BTreeMap<String, String>,
}

impl PayloadItem {
    pub fn new(id: impl Into<String>) -> Self {
        PayloadItem { id: id.into(), annotations: BTreeMap::new() }
    }
}

impl<'de> Deserialize<'de> for PayloadItem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Id(String),
            Full {
                id: String,
                #[serde(default)]
                annotations: BTreeMap<String, String>,
            },
        }
        Ok(match Raw::deserialize(deserializer)? {
            Raw::Id(id) => PayloadItem::new(id),
            Raw::Full { id, annotations } => PayloadItem { id, annotations },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    #[serde(default)]
    pub label: String,
}

/// A provider result shaped as one of the six representations. Exactly
/// the structure matching `representation` is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationPayload {
    pub representation: Representation,
    #[serde(default)]
    pub items: Vec<PayloadItem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<Edge>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub children: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<BTreeMap<String, Position>>,
}

impl RepresentationPayload {
    pub fn empty(representation: Representation) -> Self {
        let mut payload = RepresentationPayload {
            representation,
            items: Vec::new(),
            edges: None,
            children: None,
            categories: None,
            positions: None,
        };
        payload.fill_structure();
        payload
    }

    pub fn list<I, S>(representation: Representation, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut payload = Self::empty(representation);
        payload.items = ids.into_iter().map(PayloadItem::new).collect();
        payload
    }

    /// Adds the (empty) structure the representation calls for when a
    /// provider left it out, e.g. a graph without edges.
    pub fn fill_structure(&mut self) {
        match self.representation {
            Representation::Graph => {
                self.edges.get_or_insert_with(Vec::new);
            }
            Representation::Hierarchy => {
                self.children.get_or_insert_with(BTreeMap::new);
            }
            Representation::Categories => {
                self.categories.get_or_insert_with(BTreeMap::new);
            }
            Representation::Embedding => {
                self.positions.get_or_insert_with(BTreeMap::new);
            }
            Representation::Tiles | Representation::List => {}
        }
    }

    /// Every artifact id the payload references, in any structure.
    pub fn artifact_ids(&self) -> BTreeSet<&str> {
        let mut ids: BTreeSet<&str> = self.items.iter().map(|i| i.id.as_str()).collect();
        for e in self.edges.iter().flatten() {
            ids.insert(&e.from);
            ids.insert(&e.to);
        }
        for (parent, kids) in self.children.iter().flatten() {
            ids.insert(parent);
            ids.extend(kids.iter().map(String::as_str));
        }
        for members in self.categories.iter().flat_map(BTreeMap::values) {
            ids.extend(members.iter().map(String::as_str));
        }
        ids.extend(self.positions.iter().flat_map(BTreeMap::keys).map(String::as_str));
        ids
    }

    pub fn item_ids(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|i| i.id.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.artifact_ids().is_empty()
    }

    /// Structural checks that do not need the catalog: structure presence,
    /// finite positions and an acyclic hierarchy.
    pub fn check_structure(&self) -> Result<(), String> {
        let r = self.representation;
        let present = [
            (self.edges.is_some(), Representation::Graph, "edges"),
            (self.children.is_some(), Representation::Hierarchy, "children"),
            (self.categories.is_some(), Representation::Categories, "categories"),
            (self.positions.is_some(), Representation::Embedding, "positions"),
        ];
        for (is_present, owner, key) in present {
            if is_present != (r == owner) {
                return Err(if is_present {
                    format!("\"{key}\" is only allowed in {owner} payloads")
                } else {
                    format!("{owner} payload is missing \"{key}\"")
                });
            }
        }
        if let Some(positions) = &self.positions {
            if let Some((id, _)) = positions.iter().find(|(_, p)| !p.x.is_finite() || !p.y.is_finite()) {
                return Err(format!("position of \"{id}\" is not finite"));
            }
        }
        if let Some(children) = &self.children {
            if let Some(id) = find_cycle(children) {
                return Err(format!("hierarchy contains a cycle through \"{id}\""));
            }
        }
        Ok(())
    }

    /// First referenced id missing from `snapshot`.
    pub fn find_dangling(&self, snapshot: &CatalogSnapshot) -> Option<String> {
        self.artifact_ids().into_iter().find(|id| !snapshot.contains(id)).map(str::to_string)
    }

    /// Keeps only artifacts in `keep`, dropping every edge, child link,
    /// category member and position that references a dropped id.
    /// Hierarchy subtrees under a dropped node are dropped too.
    pub fn prune(&self, keep: &BTreeSet<String>) -> RepresentationPayload {
        let mut surviving: BTreeSet<&str> = self.artifact_ids().into_iter().filter(|id| keep.contains(*id)).collect();

        let children = self.children.as_ref().map(|children| {
            let has_parent: BTreeSet<&str> = children.values().flatten().map(String::as_str).collect();
            let mut reachable = BTreeSet::new();
            let mut stack: Vec<&str> = self
                .artifact_ids()
                .into_iter()
                .filter(|id| !has_parent.contains(id) && surviving.contains(id))
                .collect();
            while let Some(id) = stack.pop() {
                if reachable.insert(id) {
                    for kid in children.get(id).into_iter().flatten() {
                        if surviving.contains(kid.as_str()) {
                            stack.push(kid);
                        }
                    }
                }
            }
            surviving = reachable;
            children
                .iter()
                .filter(|(parent, _)| surviving.contains(parent.as_str()))
                .map(|(parent, kids)| {
                    let kids = kids.iter().filter(|k| surviving.contains(k.as_str())).cloned().collect();
                    (parent.clone(), kids)
                })
                .collect()
        });

        let edges = self.edges.as_ref().map(|edges| {
            edges
                .iter()
                .filter(|e| surviving.contains(e.from.as_str()) && surviving.contains(e.to.as_str()))
                .cloned()
                .collect()
        });
        let categories = self.categories.as_ref().map(|cats| {
            cats.iter()
                .filter_map(|(name, members)| {
                    let kept: Vec<String> =
                        members.iter().filter(|m| surviving.contains(m.as_str())).cloned().collect();
                    (!kept.is_empty()).then(|| (name.clone(), kept))
                })
                .collect()
        });
        let positions = self.positions.as_ref().map(|positions| {
            positions
                .iter()
                .filter(|(id, _)| surviving.contains(id.as_str()))
                .map(|(id, p)| (id.clone(), *p))
                .collect()
        });
        RepresentationPayload {
            representation: self.representation,
            items: self.items.iter().filter(|i| surviving.contains(i.id.as_str())).cloned().collect(),
            edges,
            children,
            categories,
            positions,
        }
    }
}

fn find_cycle(children: &BTreeMap<String, Vec<String>>) -> Option<String> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: HashMap<&str, Mark> = HashMap::new();
    for root in children.keys() {
        if marks.contains_key(root.as_str()) {
            continue;
        }
        // Iterative DFS: (node, index of next child to visit).
        let mut stack: Vec<(&str, usize)> = vec![(root, 0)];
        marks.insert(root, Mark::Active);
        while let Some(&(node, next)) = stack.last() {
            match children.get(node).and_then(|kids| kids.get(next)) {
                Some(kid) => {
                    if let Some(top) = stack.last_mut() {
                        top.1 += 1;
                    }
                    match marks.get(kid.as_str()) {
                        Some(Mark::Active) => return Some(kid.clone()),
                        Some(Mark::Done) => {}
                        None => {
                            marks.insert(kid, Mark::Active);
                            stack.push((kid, 0));
                        }
                    }
                }
                None => {
                    marks.insert(node, Mark::Done);
                    stack.pop();
                }
            }
        }
    }
    None
}
