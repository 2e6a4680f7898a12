//! Fixtures and a scriptable mock provider server for tests and benches.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;
use parking_lot::Mutex;
use serde_json::{json, Value};
use tokio::sync::oneshot;
use url::Url;

use crate::catalog::{load_catalog, CatalogSnapshot};
use crate::discovery::{ConfigState, ConfigStore, DiscoveryService};
use crate::provider::{ProviderRegistry, RegistryOptions};
use crate::spec::{parse_spec, SpecDocument};

/// A single provider object, trailing commas included.
pub const JOINABLE_PROVIDER_TEXT: &str = r#"{
  "type": "joinable",
  "name": "Name-Based",
  "description": "Informs about joinable tables by looking at column names.",
  "representation": "GRAPH",
  "input": [
    { "type": "TABLEID", "required": true }
  ],
  "endpoint": "api/name_joinability",
  "visible": {
    "discovery": true,
    "search": true,
  },
}"#;

/// A bare global ranking block.
pub const RANKING_TEXT: &str = r#""ranking": [
  {
    "field": "favorite", "weight": 4.3
  },
  {
    "field": "views", "weight": 1.5
  }
]"#;

/// A bare custom block with members written directly inside the array.
pub const HOME_PAGES_TEXT: &str = r#""custom": [
  "field": "home",
  "content": [
    {
      "data": ["Team", "Favorites", "Shared"],
      "name": "A Team"
    },
    {
      "data": ["Team", "Endorsed", "Recommended"],
      "name": "Research"
    }
  ]
]"#;

pub const AIRLINES_ID: &str = "AIRLINES_id";
pub const DELAYS_WORKBOOK_ID: &str = "wb_flight_delays";
pub const REVENUE_WORKBOOK_ID: &str = "wb_carrier_revenue";

/// One endorsed table and two workbooks owned by John Doe.
pub const FIXTURE_CATALOG: &str = r#"[
  {
    "id": "AIRLINES_id",
    "kind": "table",
    "name": "AIRLINES",
    "fields": {
      "owner": "Jane Roe",
      "badges": ["endorsed"],
      "views": 10,
      "favorite": false,
      "created_at": {"ts": 1600000000}
    },
    "columns": ["carrier_id", "carrier_name", "country"],
    "position": {"x": 0.1, "y": 0.8}
  },
  {
    "id": "wb_flight_delays",
    "kind": "workbook",
    "name": "Flight Delays",
    "fields": {
      "owner": "John Doe",
      "views": 2,
      "created_at": {"ts": 1650000000}
    },
    "position": {"x": 0.7, "y": 0.2}
  },
  {
    "id": "wb_carrier_revenue",
    "kind": "workbook",
    "name": "Carrier Revenue",
    "fields": {
      "owner": "John Doe",
      "views": 0,
      "created_at": {"ts": 1700000000}
    },
    "position": {"x": 0.6, "y": 0.3}
  }
]"#;

/// Extra tables for joinability: FLIGHTS shares carrier_id with AIRLINES,
/// AIRPORTS shares origin with FLIGHTS, PAYROLL shares nothing.
const JOINABLE_TABLES: &str = r#"[
  {
    "id": "FLIGHTS_id",
    "kind": "table",
    "name": "FLIGHTS",
    "fields": {"owner": "Jane Roe", "views": 7},
    "columns": ["flight_id", "carrier_id", "origin"]
  },
  {
    "id": "AIRPORTS_id",
    "kind": "table",
    "name": "AIRPORTS",
    "fields": {"owner": "Ann Lee", "badges": ["deprecated"], "views": 1},
    "columns": ["Origin", "city"]
  },
  {
    "id": "PAYROLL_id",
    "kind": "table",
    "name": "PAYROLL",
    "fields": {"owner": "Ann Lee", "favorite": true},
    "columns": ["employee_id", "salary"]
  }
]"#;

/// A document mixing HTTP providers (relative endpoints) with the builtin
/// gallery, global weights on favorites and views, and two team pages.
pub const FIXTURE_SPEC: &str = r#"{
  "providers": [
    {
      "type": "team",
      "name": "Team",
      "description": "Artifacts the team works with.",
      "representation": "LIST",
      "input": [],
      "endpoint": "team",
      "visible": {"search": false, "exploration": false}
    },
    {
      "type": "shared",
      "name": "Shared",
      "description": "Artifacts shared with the user.",
      "representation": "LIST",
      "input": [],
      "endpoint": "shared",
      "visible": {"search": false, "exploration": false}
    },
    {
      "type": "recommended",
      "name": "Recommended",
      "description": "Suggested reading.",
      "representation": "TILES",
      "input": [],
      "endpoint": "recommended",
      "visible": {"search": false, "exploration": false},
      "ranking": [{"field": "views", "weight": 1}]
    },
    {
      "type": "favorites",
      "name": "Favorites",
      "description": "Artifacts marked as favorite.",
      "representation": "LIST",
      "input": []
    },
    {
      "type": "recent",
      "name": "Recent Documents",
      "description": "Newest artifacts first.",
      "representation": "LIST",
      "input": []
    },
    {
      "type": "badged",
      "name": "Endorsed",
      "description": "Artifacts endorsed by data stewards.",
      "representation": "TILES",
      "input": []
    },
    {
      "type": "owned",
      "name": "Owned By",
      "description": "Artifacts owned by a user.",
      "representation": "LIST",
      "input": [{"type": "USERID", "required": true}],
      "visible": {"discovery": false}
    },
    {
      "type": "badged",
      "name": "Badged",
      "description": "Artifacts carrying a badge.",
      "representation": "LIST",
      "input": [{"type": "TEXT", "required": true}],
      "visible": {"discovery": false}
    },
    {
      "type": "type",
      "name": "Type",
      "description": "Artifacts of one kind.",
      "representation": "LIST",
      "input": [{"type": "TEXT", "required": true}],
      "visible": {"discovery": false}
    },
    {
      "type": "joinable",
      "name": "Name-Based",
      "description": "Informs about joinable tables by looking at column names.",
      "representation": "GRAPH",
      "input": [{"type": "TABLEID", "required": true}],
      "visible": {"discovery": false}
    },
    {
      "type": "embedding",
      "name": "Embedding",
      "description": "Artifacts laid out by similarity.",
      "representation": "EMBEDDING",
      "input": [],
      "visible": {"search": false, "exploration": false}
    }
  ],
  "ranking": [
    {"field": "favorite", "weight": 4.3},
    {"field": "views", "weight": 1.5}
  ],
  "custom": [
    {
      "field": "home",
      "content": [
        {"data": ["Team", "Favorites", "Shared"], "name": "A Team"},
        {"data": ["Team", "Endorsed", "Recommended"], "name": "Research"}
      ]
    }
  ]
}"#;

pub fn fixture_catalog() -> CatalogSnapshot {
    load_catalog(FIXTURE_CATALOG.as_bytes()).expect("fixture catalog is valid")
}

/// The fixture catalog plus three more tables, for joinability.
pub fn joinable_catalog() -> CatalogSnapshot {
    let mut artifacts: Vec<Value> = serde_json::from_str(FIXTURE_CATALOG).expect("fixture json");
    let extra: Vec<Value> = serde_json::from_str(JOINABLE_TABLES).expect("fixture json");
    artifacts.extend(extra);
    load_catalog(Value::Array(artifacts).to_string().as_bytes()).expect("joinable catalog is valid")
}

pub fn fixture_spec() -> SpecDocument {
    parse_spec(FIXTURE_SPEC.as_bytes()).expect("fixture spec is valid")
}

pub fn registry_options(provider_base: Option<Url>, timeout: Duration) -> RegistryOptions {
    RegistryOptions { provider_base, timeout, ..RegistryOptions::default() }
}

/// A service over the fixture spec and `catalog`, with in-memory config.
pub fn fixture_service(catalog: CatalogSnapshot, provider_base: Option<Url>, timeout: Duration) -> DiscoveryService {
    let doc = fixture_spec();
    let registry =
        ProviderRegistry::new(&doc, registry_options(provider_base, timeout)).expect("fixture spec registers");
    DiscoveryService::new(doc, registry, catalog, ConfigStore::in_memory(ConfigState::default()))
}

/// Responses the fixture's HTTP providers give when everything works.
pub fn standard_routes() -> Vec<(&'static str, MockResponse)> {
    vec![
        ("team", MockResponse::Json(json!({"representation": "LIST", "items": [AIRLINES_ID, DELAYS_WORKBOOK_ID]}))),
        ("shared", MockResponse::Json(json!({"representation": "LIST", "items": [REVENUE_WORKBOOK_ID]}))),
        (
            "recommended",
            MockResponse::Json(json!({
                "representation": "TILES",
                "items": [{"id": AIRLINES_ID, "annotations": {"reason": "popular"}}]
            })),
        ),
    ]
}

#[derive(Debug, Clone)]
pub enum MockResponse {
    Json(Value),
    /// Waits before answering.
    Delayed(Duration, Value),
    Status(u16),
    /// Answers with a body that is not JSON.
    Garbage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MockRequest {
    pub path: String,
    pub body: Value,
}

#[derive(Default)]
struct MockState {
    routes: Mutex<HashMap<String, MockResponse>>,
    requests: Mutex<Vec<MockRequest>>,
}

/// A local HTTP provider answering POSTs by path. Shuts down on drop.
pub struct MockProviderServer {
    pub addr: SocketAddr,
    state: Arc<MockState>,
    shutdown: Option<oneshot::Sender<()>>,
}

impl MockProviderServer {
    pub async fn start<P: Into<String>>(routes: impl IntoIterator<Item = (P, MockResponse)>) -> Self {
        let state = Arc::new(MockState::default());
        for (path, response) in routes {
            state.routes.lock().insert(path.into(), response);
        }
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.expect("bind mock provider");
        let addr = listener.local_addr().expect("mock address");
        let app = Router::new().fallback(answer).with_state(state.clone());
        let (tx, rx) = oneshot::channel();
        tokio::spawn(async move {
            let _ = axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await;
        });
        MockProviderServer { addr, state, shutdown: Some(tx) }
    }

    pub fn base_url(&self) -> Url {
        Url::parse(&format!("http://{}/", self.addr)).expect("mock url")
    }

    pub fn set_route(&self, path: &str, response: MockResponse) {
        self.state.routes.lock().insert(path.to_string(), response);
    }

    pub fn requests(&self) -> Vec<MockRequest> {
        self.state.requests.lock().clone()
    }
}

impl Drop for MockProviderServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
    }
}

async fn answer(State(state): State<Arc<MockState>>, uri: Uri, body: Bytes) -> Response {
    let path = uri.path().trim_start_matches('/').to_string();
    let body = serde_json::from_slice(&body).unwrap_or(Value::Null);
    state.requests.lock().push(MockRequest { path: path.clone(), body });
    let response = state.routes.lock().get(&path).cloned();
    match response {
        None => StatusCode::NOT_FOUND.into_response(),
        Some(MockResponse::Json(value)) => axum::Json(value).into_response(),
        Some(MockResponse::Delayed(wait, value)) => {
            tokio::time::sleep(wait).await;
            axum::Json(value).into_response()
        }
        Some(MockResponse::Status(code)) => {
            StatusCode::from_u16(code).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR).into_response()
        }
        Some(MockResponse::Garbage) => "<html>not json</html>".into_response(),
    }
}
