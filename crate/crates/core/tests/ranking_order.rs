mod common;

use common::ranked::{instance, oracle, provider, run, scale};
use humboldt_core::catalog::{CatalogSnapshot, DataArtifact, MetadataValue};
use humboldt_core::ranking::{rank, score_artifact, Contributor};
use humboldt_core::spec::{ProviderKey, RankingWeights, SpecDocument};
use humboldt_core::testkit::{fixture_catalog, fixture_spec, AIRLINES_ID, DELAYS_WORKBOOK_ID, REVENUE_WORKBOOK_ID};
use humboldt_core::Execution;
use proptest::prelude::*;

#[test]
fn favorite_and_views_example() {
    let doc = fixture_spec();
    let a = DataArtifact::new("x", "table", "x")
        .with_field("favorite", MetadataValue::Boolean(true))
        .with_field("views", MetadataValue::Number(10.0));
    let score = score_artifact(&a, doc.global_ranking.as_ref().unwrap());
    assert!((score.value - 19.3).abs() < 1e-9);
    let b = DataArtifact::new("y", "table", "y").with_field("views", MetadataValue::Number(2.0));
    assert_eq!(score_artifact(&b, doc.global_ranking.as_ref().unwrap()).value, 3.0);
}

#[test]
fn fixture_ranks_by_views() {
    let snapshot = fixture_catalog();
    let doc = fixture_spec();
    let favorites = ProviderKey::new("favorites", "Favorites");
    let results: Vec<(String, Vec<Contributor>)> = [REVENUE_WORKBOOK_ID, AIRLINES_ID, DELAYS_WORKBOOK_ID]
        .into_iter()
        .map(|id| (id.to_string(), vec![Contributor::Provider(favorites.clone())]))
        .collect();
    let ranked = rank(&results, &snapshot, &doc, doc.global_ranking.as_ref());
    assert_eq!(ranked, [AIRLINES_ID, DELAYS_WORKBOOK_ID, REVENUE_WORKBOOK_ID]);
}

#[test]
fn contributions_add_up() {
    let a = DataArtifact::new("a", "table", "a").with_field("views", MetadataValue::Number(1.0));
    let b = DataArtifact::new("b", "table", "b").with_field("views", MetadataValue::Number(4.0));
    let snapshot = CatalogSnapshot::from_artifacts([a, b]).unwrap();
    let doc = SpecDocument {
        providers: vec![
            provider(0, Some(RankingWeights::new([("views", 3.0)]))),
            provider(1, Some(RankingWeights::new([("views", 2.0)]))),
        ],
        ..Default::default()
    };
    let (p0, p1) = (doc.providers[0].key(), doc.providers[1].key());
    // a: 3 + 2 = 5 from two providers; b: 4 from the global weights.
    let results = vec![
        ("a".to_string(), vec![Contributor::Provider(p0)]),
        ("b".to_string(), vec![Contributor::Global]),
        ("a".to_string(), vec![Contributor::Provider(p1)]),
    ];
    let global = RankingWeights::new([("views", 1.0)]);
    assert_eq!(rank(&results, &snapshot, &doc, Some(&global)), ["a", "b"]);
}

#[test]
fn ties_break_by_id() {
    let snapshot = CatalogSnapshot::from_artifacts(["c", "a", "b"].map(|id| DataArtifact::new(id, "t", id))).unwrap();
    let results: Vec<_> = ["c", "a", "b"].map(|id| (id.to_string(), vec![Contributor::Global])).into();
    assert_eq!(rank(&results, &snapshot, &SpecDocument::default(), None), ["a", "b", "c"]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn matches_brute_force(inst in instance()) {
        prop_assert_eq!(run(&inst, Execution::default()), oracle(&inst));
    }

    #[test]
    fn deterministic_and_strategy_independent(inst in instance()) {
        let a = run(&inst, Execution::Sequential);
        prop_assert_eq!(&a, &run(&inst, Execution::default()));
        prop_assert_eq!(&a, &run(&inst, Execution::Sequential));
    }

    #[test]
    fn output_is_a_permutation_of_distinct_ids(inst in instance()) {
        let mut ranked = run(&inst, Execution::default());
        ranked.sort();
        let mut ids: Vec<String> = inst.results.iter().map(|(id, _)| id.clone()).collect();
        ids.sort();
        ids.dedup();
        prop_assert_eq!(ranked, ids);
    }

    /// Scaling by a power of two is exact in binary floating point, so
    /// every score scales exactly and the order cannot change.
    #[test]
    fn positive_rescaling_keeps_order(inst in instance(), e in -20i32..20) {
        let c = 2f64.powi(e);
        prop_assert_eq!(run(&scale(&inst, c), Execution::default()), run(&inst, Execution::default()));
    }

    #[test]
    fn raising_a_positively_weighted_field_never_demotes(inst in instance(), pick in any::<prop::sample::Index>()) {
        let mut inst = inst;
        inst.global = Some(RankingWeights::new([("views", 1.5)]));
        for p in &mut inst.doc.providers {
            p.ranking = None;
        }
        let before = run(&inst, Execution::default());
        prop_assume!(!before.is_empty());
        let target = before[pick.index(before.len())].clone();
        let mut artifacts: Vec<DataArtifact> = inst.snapshot.artifacts().cloned().collect();
        for a in &mut artifacts {
            if a.id == target {
                let v = match a.fields.get("views") { Some(MetadataValue::Number(n)) => *n, _ => 0.0 };
                a.fields.insert("views".into(), MetadataValue::Number(v + 5.0));
            }
        }
        inst.snapshot = CatalogSnapshot::from_artifacts(artifacts).unwrap();
        let after = run(&inst, Execution::default());
        let pos = |v: &[String]| v.iter().position(|id| *id == target).unwrap();
        prop_assert!(pos(&after) <= pos(&before));
    }
}
