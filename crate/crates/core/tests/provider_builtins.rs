mod common;

use std::collections::{BTreeSet, VecDeque};

use common::catalog;
use futures::executor::block_on;
use humboldt_core::catalog::{CatalogSnapshot, DataArtifact};
use humboldt_core::provider::{
    bind_inputs, eval_builtin, name_joinable, register_providers, BuiltinKind, FetchError, InputBinding,
    RegistryError, RepresentationPayload,
};
use humboldt_core::spec::{parse_spec, InputType, ProviderKey, Representation, Surface};
use humboldt_core::testkit::{fixture_catalog, fixture_spec, joinable_catalog, AIRLINES_ID, DELAYS_WORKBOOK_ID, REVENUE_WORKBOOK_ID};
use humboldt_core::Execution;
use proptest::prelude::*;

fn ids(payload: &RepresentationPayload) -> Vec<&str> {
    payload.item_ids().collect()
}

fn sorted(ids: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut v: Vec<String> = ids.into_iter().collect();
    v.sort();
    v
}

#[test]
fn owned_by_john_doe() {
    let snapshot = fixture_catalog();
    let binding = InputBinding::default().with(InputType::UserId, "John Doe");
    let payload = eval_builtin(BuiltinKind::OwnedBy, &binding, &snapshot, Execution::default()).unwrap();
    assert_eq!(ids(&payload), [REVENUE_WORKBOOK_ID, DELAYS_WORKBOOK_ID]);
}

#[test]
fn badged_endorsed() {
    let snapshot = fixture_catalog();
    let binding = InputBinding::default().with(InputType::Text, "endorsed");
    let payload = eval_builtin(BuiltinKind::Badged, &binding, &snapshot, Execution::default()).unwrap();
    assert_eq!(ids(&payload), [AIRLINES_ID]);
}

#[test]
fn recent_documents_newest_first() {
    let snapshot = fixture_catalog();
    let payload = eval_builtin(BuiltinKind::RecentDocuments, &InputBinding::default(), &snapshot, Execution::default())
        .unwrap();
    assert_eq!(ids(&payload), [REVENUE_WORKBOOK_ID, DELAYS_WORKBOOK_ID, AIRLINES_ID]);
}

#[test]
fn joinability_over_shared_columns() {
    let snapshot = joinable_catalog();
    let payload = name_joinable(AIRLINES_ID, &snapshot, Execution::default()).unwrap();
    assert_eq!(payload.representation, Representation::Graph);
    assert_eq!(ids(&payload), ["AIRLINES_id", "AIRPORTS_id", "FLIGHTS_id"]);
    let edges: Vec<(&str, &str, &str)> =
        payload.edges.iter().flatten().map(|e| (e.from.as_str(), e.to.as_str(), e.label.as_str())).collect();
    assert_eq!(edges, [("AIRLINES_id", "FLIGHTS_id", "carrier_id"), ("AIRPORTS_id", "FLIGHTS_id", "origin")]);

    let alone = name_joinable("PAYROLL_id", &snapshot, Execution::default()).unwrap();
    assert_eq!(ids(&alone), ["PAYROLL_id"]);
    assert!(alone.edges.as_ref().unwrap().is_empty());

    assert!(matches!(
        name_joinable("nope", &snapshot, Execution::default()),
        Err(FetchError::DanglingArtifact { .. })
    ));
    assert!(matches!(
        name_joinable(DELAYS_WORKBOOK_ID, &snapshot, Execution::default()),
        Err(FetchError::InvalidInput { .. })
    ));
}

#[test]
fn binding_from_selection_and_arguments() {
    let snapshot = fixture_catalog();
    let doc = fixture_spec();
    let airlines = snapshot.get(AIRLINES_ID).unwrap();
    let joinable = doc.provider(&ProviderKey::new("joinable", "Name-Based")).unwrap();
    assert_eq!(
        bind_inputs(joinable, Some(airlines), &[]).unwrap(),
        InputBinding::default().with(InputType::TableId, AIRLINES_ID)
    );
    let workbook = snapshot.get(DELAYS_WORKBOOK_ID).unwrap();
    assert_eq!(bind_inputs(joinable, Some(workbook), &[]).unwrap_err().missing, [InputType::TableId]);

    let owned = doc.provider(&ProviderKey::new("owned", "Owned By")).unwrap();
    assert_eq!(
        bind_inputs(owned, None, &["John Doe".to_string()]).unwrap(),
        InputBinding::default().with(InputType::UserId, "John Doe")
    );
    assert_eq!(bind_inputs(owned, None, &[]).unwrap_err().missing, [InputType::UserId]);
}

#[test]
fn applicability_follows_the_selection() {
    let snapshot = fixture_catalog();
    let registry = register_providers(&fixture_spec()).unwrap();
    let names = |sel: Option<&DataArtifact>, surface| -> Vec<String> {
        registry.applicable_providers(surface, sel).into_iter().map(|p| p.name.clone()).collect()
    };
    let table = names(snapshot.get(AIRLINES_ID), Surface::Exploration);
    assert!(table.contains(&"Name-Based".to_string()));
    assert!(table.contains(&"Owned By".to_string()));
    let workbook = names(snapshot.get(DELAYS_WORKBOOK_ID), Surface::Exploration);
    assert!(!workbook.contains(&"Name-Based".to_string()));
    let overview = names(None, Surface::Discovery);
    assert_eq!(overview, ["Team", "Shared", "Recommended", "Favorites", "Recent Documents", "Endorsed", "Embedding"]);
}

#[test]
fn registry_rejects_unknown_and_incompatible_builtins() {
    let unknown = parse_spec(br#"{"type": "x", "name": "Y", "representation": "LIST"}"#).unwrap();
    assert!(matches!(register_providers(&unknown), Err(RegistryError::UnknownBuiltin(_))));
    let wrong = parse_spec(br#"{"type": "joinable", "name": "Name-Based", "representation": "LIST"}"#).unwrap();
    assert!(matches!(register_providers(&wrong), Err(RegistryError::IncompatibleBuiltin { .. })));
}

#[test]
fn builtin_payloads_carry_the_declared_representation() {
    let snapshot = joinable_catalog();
    let doc = fixture_spec();
    let registry = register_providers(&doc).unwrap();
    let airlines = snapshot.get(AIRLINES_ID).unwrap();
    for spec in registry.specs().filter(|s| s.endpoint.is_none()) {
        let binding = bind_inputs(spec, Some(airlines), &[]).unwrap();
        let payload = block_on(registry.fetch(&spec.key(), &binding, &snapshot)).unwrap();
        assert_eq!(payload.representation, spec.representation, "{}", spec.key());
        payload.check_structure().unwrap();
    }
}

/// Tables connected to `start` through shared (case-insensitive) column
/// names, with one edge per sharing pair.
fn joinable_oracle(snapshot: &CatalogSnapshot, start: &str) -> (BTreeSet<String>, BTreeSet<(String, String)>) {
    let tables: Vec<&DataArtifact> = snapshot.artifacts().filter(|a| a.kind == "table").collect();
    let share = |a: &DataArtifact, b: &DataArtifact| {
        let cols = |t: &DataArtifact| -> BTreeSet<String> {
            t.columns.clone().unwrap_or_default().into_iter().map(|c| c.to_lowercase()).collect()
        };
        !cols(a).is_disjoint(&cols(b))
    };
    let mut seen = BTreeSet::from([start.to_string()]);
    let mut queue = VecDeque::from([start.to_string()]);
    while let Some(id) = queue.pop_front() {
        let here = snapshot.get(&id).unwrap();
        for t in &tables {
            if t.id != id && share(here, t) && seen.insert(t.id.clone()) {
                queue.push_back(t.id.clone());
            }
        }
    }
    let mut edges = BTreeSet::new();
    for a in &tables {
        for b in &tables {
            if a.id < b.id && seen.contains(&a.id) && share(a, b) {
                edges.insert((a.id.clone(), b.id.clone()));
            }
        }
    }
    (seen, edges)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn list_builtins_match_brute_force(snapshot in catalog(100), who in prop::sample::select(common::OWNERS.to_vec()), badge in prop::sample::select(common::BADGES.to_vec()), kind in prop::sample::select(common::KINDS.to_vec())) {
        let exec = Execution::default();
        let all: Vec<&DataArtifact> = snapshot.artifacts().collect();
        let run = |k, b: InputBinding| -> Vec<String> {
            eval_builtin(k, &b, &snapshot, exec).unwrap().item_ids().map(str::to_string).collect()
        };
        let pick = |f: &dyn Fn(&DataArtifact) -> bool| -> Vec<String> {
            sorted(all.iter().filter(|a| f(a)).map(|a| a.id.clone()))
        };

        prop_assert_eq!(
            sorted(run(BuiltinKind::OwnedBy, InputBinding::default().with(InputType::UserId, who.to_uppercase()))),
            pick(&|a| a.owner().is_some_and(|o| o.to_lowercase() == who.to_lowercase()))
        );
        prop_assert_eq!(
            sorted(run(BuiltinKind::Badged, InputBinding::default().with(InputType::Text, badge))),
            pick(&|a| a.badges().iter().any(|b| b.to_lowercase() == badge.to_lowercase()))
        );
        prop_assert_eq!(
            sorted(run(BuiltinKind::TypeIs, InputBinding::default().with(InputType::Text, kind))),
            pick(&|a| a.kind == kind)
        );
        prop_assert_eq!(sorted(run(BuiltinKind::Favorites, InputBinding::default())), pick(&|a| a.is_favorite()));

        let recent = run(BuiltinKind::RecentDocuments, InputBinding::default());
        let mut dated: Vec<(i64, String)> = all.iter().filter_map(|a| a.created_at().map(|t| (t, a.id.clone()))).collect();
        dated.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        prop_assert_eq!(recent, dated.into_iter().map(|(_, id)| id).collect::<Vec<_>>());

        let embedding = eval_builtin(BuiltinKind::EmbeddingView, &InputBinding::default(), &snapshot, exec).unwrap();
        prop_assert_eq!(
            embedding.positions.unwrap().keys().cloned().collect::<Vec<_>>(),
            pick(&|a| a.position.is_some())
        );
    }

    #[test]
    fn joinability_matches_brute_force_and_is_symmetric(snapshot in catalog(100)) {
        let tables: Vec<String> = snapshot.artifacts().filter(|a| a.is_table()).map(|a| a.id.clone()).collect();
        for t in &tables {
            let payload = name_joinable(t, &snapshot, Execution::default()).unwrap();
            let (nodes, edges) = joinable_oracle(&snapshot, t);
            let got_nodes: BTreeSet<String> = payload.item_ids().map(str::to_string).collect();
            let got_edges: BTreeSet<(String, String)> =
                payload.edges.iter().flatten().map(|e| (e.from.clone(), e.to.clone())).collect();
            prop_assert_eq!(&got_nodes, &nodes);
            prop_assert_eq!(&got_edges, &edges);
            // Symmetry: every reachable table sees the same component.
            for other in &nodes {
                let back = name_joinable(other, &snapshot, Execution::Sequential).unwrap();
                prop_assert!(back.item_ids().any(|id| id == t));
                prop_assert_eq!(&back, &payload);
            }
        }
    }
}
