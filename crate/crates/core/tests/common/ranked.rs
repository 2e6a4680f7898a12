//! Random ranking instances and a brute-force ranker.

use std::collections::BTreeMap;

use humboldt_core::catalog::{CatalogSnapshot, DataArtifact, MetadataValue};
use humboldt_core::ranking::{rank_with, Contributor};
use humboldt_core::spec::{ProviderKey, ProviderSpec, RankingWeights, Representation, SpecDocument};
use humboldt_core::Execution;
use proptest::prelude::*;

pub const FIELDS: &[&str] = &["views", "favorite", "rating", "owner", "created_at"];

pub fn provider(i: usize, ranking: Option<RankingWeights>) -> ProviderSpec {
    ProviderSpec {
        type_: "p".into(),
        name: format!("P{i}"),
        description: String::new(),
        representation: Representation::List,
        inputs: vec![],
        endpoint: None,
        visible: None,
        ranking,
    }
}

pub fn weights() -> impl Strategy<Value = RankingWeights> {
    prop::collection::vec((prop::sample::select(FIELDS.to_vec()), -10.0f64..10.0), 0..4).prop_map(RankingWeights::new)
}

prop_compose! {
    pub fn artifact(i: usize)(
        views in prop::option::of(0u32..50),
        favorite in prop::option::of(any::<bool>()),
        rating in prop::option::of(-3.0f64..3.0),
        created in prop::option::of(0i64..10_000),
    ) -> DataArtifact {
        let mut a = DataArtifact::new(format!("r{i:03}"), "table", format!("t{i}"))
            .with_field("owner", MetadataValue::Text("x".into()));
        if let Some(v) = views { a = a.with_field("views", MetadataValue::Number(v as f64)); }
        if let Some(f) = favorite { a = a.with_field("favorite", MetadataValue::Boolean(f)); }
        if let Some(r) = rating { a = a.with_field("rating", MetadataValue::Number(r)); }
        if let Some(ts) = created { a = a.with_field("created_at", MetadataValue::Timestamp(ts)); }
        a
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub snapshot: CatalogSnapshot,
    pub doc: SpecDocument,
    pub global: Option<RankingWeights>,
    pub results: Vec<(String, Vec<Contributor>)>,
}

pub fn instance() -> impl Strategy<Value = Instance> {
    (1usize..=100, 1usize..=5)
        .prop_flat_map(|(n, p)| {
            (
                (0..n).map(artifact).collect::<Vec<_>>(),
                prop::collection::vec(prop::option::of(weights()), p),
                prop::option::of(weights()),
                prop::collection::vec((0..n, prop::collection::vec(0..=p, 1..3)), 0..(2 * n)),
            )
        })
        .prop_map(|(artifacts, provider_weights, global, picks)| {
            let snapshot = CatalogSnapshot::from_artifacts(artifacts.clone()).unwrap();
            let providers: Vec<ProviderSpec> =
                provider_weights.into_iter().enumerate().map(|(i, w)| provider(i, w)).collect();
            let keys: Vec<ProviderKey> = providers.iter().map(ProviderSpec::key).collect();
            let results = picks
                .into_iter()
                .map(|(a, cs)| {
                    let contributors = cs
                        .into_iter()
                        .map(|c| if c == keys.len() { Contributor::Global } else { Contributor::Provider(keys[c].clone()) })
                        .collect();
                    (artifacts[a].id.clone(), contributors)
                })
                .collect();
            Instance { snapshot, doc: SpecDocument { providers, ..Default::default() }, global, results }
        })
}

/// Brute force: merge contributors per id in input order, add up
/// weight × value per contributor, sort by score then id.
pub fn oracle(inst: &Instance) -> Vec<String> {
    let mut merged: BTreeMap<&str, Vec<&Contributor>> = BTreeMap::new();
    for (id, cs) in &inst.results {
        merged.entry(id).or_default().extend(cs.iter());
    }
    let none = RankingWeights::default();
    let mut scored: Vec<(f64, String)> = merged
        .into_iter()
        .map(|(id, cs)| {
            let a = inst.snapshot.get(id).unwrap();
            let mut total = 0.0;
            for c in cs {
                let w = match c {
                    Contributor::Global => inst.global.as_ref().unwrap_or(&none),
                    Contributor::Provider(k) => {
                        let spec = inst.doc.providers.iter().find(|p| p.key() == *k).unwrap();
                        spec.ranking.as_ref().or(inst.global.as_ref()).unwrap_or(&none)
                    }
                };
                let mut s = 0.0;
                for e in &w.entries {
                    let x = match a.fields.get(&e.field) {
                        Some(MetadataValue::Number(n)) => *n,
                        Some(MetadataValue::Boolean(true)) => 1.0,
                        _ => 0.0,
                    };
                    s += e.weight * x;
                }
                total += s;
            }
            (total, id.to_string())
        })
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    scored.into_iter().map(|(_, id)| id).collect()
}

pub fn run(inst: &Instance, exec: Execution) -> Vec<String> {
    rank_with(&inst.results, &inst.snapshot, &inst.doc, inst.global.as_ref(), exec)
}

pub fn scale(inst: &Instance, c: f64) -> Instance {
    let mut out = inst.clone();
    for p in &mut out.doc.providers {
        p.ranking = p.ranking.as_ref().map(|w| w.scaled(c));
    }
    out.global = out.global.as_ref().map(|w| w.scaled(c));
    out
}
