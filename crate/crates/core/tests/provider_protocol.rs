use std::time::{Duration, Instant};

use humboldt_core::provider::{FetchError, InputBinding, ProviderRegistry};
use humboldt_core::spec::{parse_spec, InputType, ProviderKey, Representation};
use humboldt_core::testkit::{
    fixture_catalog, joinable_catalog, registry_options, MockProviderServer, MockResponse, AIRLINES_ID,
    JOINABLE_PROVIDER_TEXT,
};
use serde_json::json;

const TIMEOUT: Duration = Duration::from_millis(300);

fn joinable_key() -> ProviderKey {
    ProviderKey::new("joinable", "Name-Based")
}

async fn registry_for(server: &MockProviderServer) -> ProviderRegistry {
    let doc = parse_spec(JOINABLE_PROVIDER_TEXT.as_bytes()).unwrap();
    ProviderRegistry::new(&doc, registry_options(Some(server.base_url()), TIMEOUT)).unwrap()
}

fn airlines_binding() -> InputBinding {
    InputBinding::default().with(InputType::TableId, AIRLINES_ID)
}

#[tokio::test]
async fn graph_success() {
    let graph = json!({
        "representation": "GRAPH",
        "items": [AIRLINES_ID, "FLIGHTS_id"],
        "edges": [{"from": AIRLINES_ID, "to": "FLIGHTS_id", "label": "carrier_id"}]
    });
    let server = MockProviderServer::start([("api/name_joinability", MockResponse::Json(graph))]).await;
    let registry = registry_for(&server).await;
    let payload = registry.fetch(&joinable_key(), &airlines_binding(), &joinable_catalog()).await.unwrap();
    assert_eq!(payload.representation, Representation::Graph);
    assert_eq!(payload.items.len(), 2);
    assert_eq!(payload.edges.as_ref().unwrap().len(), 1);

    let requests = server.requests();
    assert_eq!(requests.len(), 1);
    assert_eq!(requests[0].path, "api/name_joinability");
    assert_eq!(requests[0].body, json!({"input": {"TABLEID": AIRLINES_ID}}));
}

#[tokio::test]
async fn representation_mismatch() {
    let list = json!({"representation": "LIST", "items": [AIRLINES_ID]});
    let server = MockProviderServer::start([("api/name_joinability", MockResponse::Json(list))]).await;
    let registry = registry_for(&server).await;
    let err = registry.fetch(&joinable_key(), &airlines_binding(), &fixture_catalog()).await.unwrap_err();
    assert_eq!(
        err,
        FetchError::RepresentationMismatch {
            provider: Some(joinable_key()),
            expected: Representation::Graph,
            actual: Representation::List,
        }
    );
}

#[tokio::test]
async fn dangling_artifact() {
    let graph = json!({"representation": "GRAPH", "items": [AIRLINES_ID, "GHOST"], "edges": []});
    let server = MockProviderServer::start([("api/name_joinability", MockResponse::Json(graph))]).await;
    let registry = registry_for(&server).await;
    let err = registry.fetch(&joinable_key(), &airlines_binding(), &fixture_catalog()).await.unwrap_err();
    assert_eq!(err, FetchError::DanglingArtifact { provider: Some(joinable_key()), id: "GHOST".into() });

    // An edge endpoint counts as a reference too.
    let edge_only = json!({
        "representation": "GRAPH",
        "items": [AIRLINES_ID],
        "edges": [{"from": AIRLINES_ID, "to": "GHOST"}]
    });
    server.set_route("api/name_joinability", MockResponse::Json(edge_only));
    let err = registry.fetch(&joinable_key(), &airlines_binding(), &fixture_catalog()).await.unwrap_err();
    assert!(matches!(err, FetchError::DanglingArtifact { ref id, .. } if id == "GHOST"));
}

#[tokio::test]
async fn timeout_is_provider_unavailable() {
    let graph = json!({"representation": "GRAPH", "items": []});
    let server = MockProviderServer::start([(
        "api/name_joinability",
        MockResponse::Delayed(Duration::from_secs(5), graph),
    )])
    .await;
    let registry = registry_for(&server).await;
    let started = Instant::now();
    let err = registry.fetch(&joinable_key(), &airlines_binding(), &fixture_catalog()).await.unwrap_err();
    assert!(matches!(err, FetchError::ProviderUnavailable { .. }), "{err:?}");
    assert!(started.elapsed() < Duration::from_secs(3));
}

#[tokio::test]
async fn server_errors_and_garbage() {
    let server = MockProviderServer::start([("api/name_joinability", MockResponse::Status(500))]).await;
    let registry = registry_for(&server).await;
    let snapshot = fixture_catalog();
    let err = registry.fetch(&joinable_key(), &airlines_binding(), &snapshot).await.unwrap_err();
    assert!(matches!(err, FetchError::ProviderUnavailable { .. }), "{err:?}");

    server.set_route("api/name_joinability", MockResponse::Garbage);
    let err = registry.fetch(&joinable_key(), &airlines_binding(), &snapshot).await.unwrap_err();
    assert!(matches!(err, FetchError::InvalidPayload { .. }), "{err:?}");

    // A graph payload carrying hierarchy structure is malformed.
    let mixed = json!({"representation": "GRAPH", "items": [], "children": {}});
    server.set_route("api/name_joinability", MockResponse::Json(mixed));
    let err = registry.fetch(&joinable_key(), &airlines_binding(), &snapshot).await.unwrap_err();
    assert!(matches!(err, FetchError::InvalidPayload { .. }), "{err:?}");
}

#[tokio::test]
async fn missing_input_is_checked_before_calling() {
    let server = MockProviderServer::start(Vec::<(&str, MockResponse)>::new()).await;
    let registry = registry_for(&server).await;
    let err = registry.fetch(&joinable_key(), &InputBinding::default(), &fixture_catalog()).await.unwrap_err();
    assert_eq!(err, FetchError::MissingInput { provider: Some(joinable_key()), missing: vec![InputType::TableId] });
    assert!(server.requests().is_empty());
}

#[tokio::test]
async fn unreachable_provider() {
    let server = MockProviderServer::start(Vec::<(&str, MockResponse)>::new()).await;
    let base = server.base_url();
    drop(server);
    tokio::time::sleep(Duration::from_millis(50)).await;
    let doc = parse_spec(JOINABLE_PROVIDER_TEXT.as_bytes()).unwrap();
    let registry = ProviderRegistry::new(&doc, registry_options(Some(base), TIMEOUT)).unwrap();
    let err = registry.fetch(&joinable_key(), &airlines_binding(), &fixture_catalog()).await.unwrap_err();
    assert!(matches!(err, FetchError::ProviderUnavailable { .. }), "{err:?}");
}
