//! Random catalogs and queries, plus brute-force reference semantics that
//! share no code with the engine.

#![allow(dead_code)]

pub mod ranked;

use std::collections::BTreeSet;

use humboldt_core::catalog::{CatalogSnapshot, DataArtifact, MetadataValue, Position};
use humboldt_core::QueryAst;
use proptest::prelude::*;

pub const KINDS: &[&str] = &["table", "workbook", "dashboard"];
pub const WORDS: &[&str] = &["Sales", "flights", "AIRLINES", "bit", "Revenue", "payroll", "Orbit", "sales q3"];
pub const OWNERS: &[&str] = &["Alice", "Bob", "John Doe", "alice"];
pub const BADGES: &[&str] = &["endorsed", "deprecated", "PII"];
pub const COLUMNS: &[&str] = &["id", "carrier_id", "Origin", "origin", "city", "salary"];

fn subset(pool: &'static [&'static str], max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::sample::subsequence(pool.to_vec(), 0..=max.min(pool.len()))
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

prop_compose! {
    pub fn artifact(index: usize)(
        kind in prop::sample::select(KINDS.to_vec()),
        name in prop::sample::select(WORDS.to_vec()),
        owner in prop::option::of(prop::sample::select(OWNERS.to_vec())),
        badges in prop::option::of(subset(BADGES, 2)),
        views in prop::option::of(0u32..20),
        favorite in prop::option::of(any::<bool>()),
        created in prop::option::of(0i64..1000),
        columns in subset(COLUMNS, 3),
        position in prop::option::of((-1.0f64..1.0, -1.0f64..1.0)),
        rating in prop::option::of(-5.0f64..5.0),
    ) -> DataArtifact {
        let mut a = DataArtifact::new(format!("a{index:03}"), kind, name);
        if let Some(o) = owner {
            a = a.with_field("owner", MetadataValue::Text(o.into()));
        }
        if let Some(b) = badges {
            a = a.with_field("badges", MetadataValue::TextList(b));
        }
        if let Some(v) = views {
            a = a.with_field("views", MetadataValue::Number(v as f64));
        }
        if let Some(f) = favorite {
            a = a.with_field("favorite", MetadataValue::Boolean(f));
        }
        if let Some(ts) = created {
            a = a.with_field("created_at", MetadataValue::Timestamp(ts));
        }
        if let Some(r) = rating {
            a = a.with_field("rating", MetadataValue::Number(r));
        }
        if kind == "table" {
            a.columns = Some(columns);
        }
        a.position = position.map(|(x, y)| Position { x, y });
        a
    }
}

pub fn catalog(max: usize) -> impl Strategy<Value = CatalogSnapshot> {
    (0..=max)
        .prop_flat_map(|n| (0..n).map(artifact).collect::<Vec<_>>())
        .prop_map(|artifacts| CatalogSnapshot::from_artifacts(artifacts).expect("ids are distinct"))
}

/// Provider calls the standard builtins answer, with the brute-force
/// definition of each.
pub const CALLS: &[(&str, &[&str])] = &[
    ("owned_by", &["Alice"]),
    ("owned_by", &["john doe"]),
    ("badged", &["endorsed"]),
    ("badged", &["pii"]),
    ("type", &["table"]),
    ("type", &["Workbook"]),
    ("favorites", &[]),
    ("recent_documents", &[]),
];

pub fn leaf(with_calls: bool) -> BoxedStrategy<QueryAst> {
    let keyword = prop::sample::select(vec!["sales", "AIR", "bit", "orbit", "q3", "endorsed", "alice", "table", "zzz"])
        .prop_map(QueryAst::keyword);
    let pill = prop::sample::select(vec![
        ("type", "table"),
        ("kind", "WORKBOOK"),
        ("owned_by", "John Doe"),
        ("owned_by", "alice"),
        ("badged_by", "Endorsed"),
        ("badged", "pii"),
        ("name", "sales q3"),
        ("views", "3"),
        ("favorite", "true"),
        ("favorite", "False"),
        ("created_at", "10"),
        ("rating", "x"),
        ("missing_field", "1"),
    ])
    .prop_map(|(f, v)| QueryAst::pill(f, v));
    if with_calls {
        let call = prop::sample::select(CALLS.to_vec()).prop_map(|(p, args)| QueryAst::call(p, args));
        prop_oneof![3 => keyword, 3 => pill, 2 => call].boxed()
    } else {
        prop_oneof![keyword, pill].boxed()
    }
}

pub fn query(negation: bool, with_calls: bool) -> BoxedStrategy<QueryAst> {
    leaf(with_calls)
        .prop_recursive(5, 32, 2, move |inner| {
            let binary = (inner.clone(), inner.clone(), 0..2u8).prop_map(|(l, r, op)| match op {
                0 => QueryAst::and(l, r),
                _ => QueryAst::or(l, r),
            });
            let group = inner.clone().prop_map(QueryAst::group);
            if negation {
                prop_oneof![4 => binary, 1 => group, 2 => inner.prop_map(QueryAst::not)].boxed()
            } else {
                prop_oneof![4 => binary, 1 => group].boxed()
            }
        })
        .boxed()
}

fn eq_ci(a: &str, b: &str) -> bool {
    a.to_lowercase() == b.to_lowercase()
}

fn field_holds(a: &DataArtifact, field: &str, value: &str) -> bool {
    match field {
        "type" | "kind" => eq_ci(&a.kind, value),
        "name" => eq_ci(&a.name, value),
        _ => {
            let key = match field {
                "owned_by" => "owner",
                "badged_by" | "badged" => "badges",
                other => other,
            };
            match a.fields.get(key) {
                None => false,
                Some(MetadataValue::Text(s)) => eq_ci(s, value),
                Some(MetadataValue::TextList(items)) => items.iter().any(|s| eq_ci(s, value)),
                Some(MetadataValue::Number(n)) => value.parse::<f64>().map(|v| v == *n).unwrap_or(false),
                Some(MetadataValue::Boolean(b)) => match value.to_lowercase().as_str() {
                    "true" => *b,
                    "false" => !*b,
                    _ => false,
                },
                Some(MetadataValue::Timestamp(ts)) => value.parse::<i64>().map(|v| v == *ts).unwrap_or(false),
            }
        }
    }
}

fn keyword_holds(a: &DataArtifact, keyword: &str) -> bool {
    let k = keyword.to_lowercase();
    let mut texts = vec![a.name.to_lowercase(), a.kind.to_lowercase()];
    for v in a.fields.values() {
        match v {
            MetadataValue::Text(s) => texts.push(s.to_lowercase()),
            MetadataValue::TextList(items) => texts.extend(items.iter().map(|s| s.to_lowercase())),
            _ => {}
        }
    }
    texts.iter().any(|t| t.contains(&k))
}

/// Reference result of a builtin call over the whole catalog.
pub fn call_holds(a: &DataArtifact, provider: &str, args: &[String]) -> bool {
    let arg = args.first().map(String::as_str).unwrap_or("");
    match provider {
        "owned_by" => matches!(a.fields.get("owner"), Some(MetadataValue::Text(o)) if eq_ci(o, arg)),
        "badged" => matches!(a.fields.get("badges"), Some(MetadataValue::TextList(b)) if b.iter().any(|x| eq_ci(x, arg))),
        "type" => eq_ci(&a.kind, arg),
        "favorites" => matches!(a.fields.get("favorite"), Some(MetadataValue::Boolean(true))),
        "recent_documents" => matches!(a.fields.get("created_at"), Some(MetadataValue::Timestamp(_))),
        other => panic!("no reference for {other}"),
    }
}

/// Brute-force evaluation: each node is decided per artifact, the
/// complement taken against `scope`.
pub fn oracle(ast: &QueryAst, scope: &BTreeSet<String>, catalog: &CatalogSnapshot) -> BTreeSet<String> {
    scope
        .iter()
        .filter(|id| {
            let a = catalog.get(id).expect("scope lies within the catalog");
            holds(ast, a)
        })
        .cloned()
        .collect()
}

fn holds(ast: &QueryAst, a: &DataArtifact) -> bool {
    match ast {
        QueryAst::Keyword(k) => keyword_holds(a, k),
        QueryAst::FieldPill { field, value } => field_holds(a, field, value),
        QueryAst::ProviderCall { provider, args } => call_holds(a, provider, args),
        QueryAst::And(l, r) => holds(l, a) && holds(r, a),
        QueryAst::Or(l, r) => holds(l, a) || holds(r, a),
        QueryAst::Not(c) => !holds(c, a),
        QueryAst::Group(c) => holds(c, a),
    }
}

/// A spec registering the standard builtins under the names the calls use.
pub const BUILTIN_SPEC: &str = r#"{"providers": [
  {"type": "owned", "name": "Owned By", "representation": "LIST", "input": [{"type": "USERID", "required": true}]},
  {"type": "badged", "name": "Badged", "representation": "LIST", "input": [{"type": "TEXT", "required": true}]},
  {"type": "type", "name": "Type", "representation": "LIST", "input": [{"type": "TEXT", "required": true}]},
  {"type": "favorites", "name": "Favorites", "representation": "LIST", "input": []},
  {"type": "recent", "name": "Recent Documents", "representation": "LIST", "input": []},
  {"type": "joinable", "name": "Name-Based", "representation": "GRAPH", "input": [{"type": "TABLEID", "required": true}]},
  {"type": "embedding", "name": "Embedding", "representation": "EMBEDDING", "input": []}
]}"#;
