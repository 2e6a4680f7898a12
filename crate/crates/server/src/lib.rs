//! REST API over a [`DiscoveryService`].
//!
//! Callers identify themselves with the `x-humboldt-user` and
//! `x-humboldt-role` headers. Errors are JSON objects with `error` and
//! `message`; query parse errors add the byte `position`.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use humboldt_core::catalog::load_catalog;
use humboldt_core::discovery::{
    AdminConfig, Caller, ConfigChange, ConfigError, ConfigScope, ConfigState, ConfigStore, Role, ServiceError,
    TeamChange, UserChange,
};
use humboldt_core::provider::{bind_inputs, FetchError, ProviderRegistry, RegistryOptions};
use humboldt_core::query::EvalError;
use humboldt_core::spec::{parse_spec, provider_to_value, InputType, ProviderKey, Surface};
use humboldt_core::DiscoveryService;
use serde::Deserialize;
use serde_json::{json, Value};

pub const USER_HEADER: &str = "x-humboldt-user";
pub const ROLE_HEADER: &str = "x-humboldt-role";
pub const ANONYMOUS: &str = "anonymous";

/// Loads the spec, catalog and config state and wires up a service.
pub fn load_service(
    spec: &Path,
    catalog: &Path,
    state: Option<&Path>,
    provider_base: Option<url::Url>,
    timeout: Duration,
) -> anyhow::Result<DiscoveryService> {
    let spec_bytes = std::fs::read(spec).with_context(|| format!("reading {}", spec.display()))?;
    let doc = parse_spec(&spec_bytes).with_context(|| format!("parsing {}", spec.display()))?;
    let catalog_bytes = std::fs::read(catalog).with_context(|| format!("reading {}", catalog.display()))?;
    let snapshot = load_catalog(&catalog_bytes).with_context(|| format!("loading {}", catalog.display()))?;
    let options = RegistryOptions { provider_base, timeout, ..RegistryOptions::default() };
    let registry = ProviderRegistry::new(&doc, options)?;
    let config = match state {
        Some(path) => ConfigStore::open(path).with_context(|| format!("opening {}", path.display()))?,
        None => ConfigStore::in_memory(ConfigState::default()),
    };
    Ok(DiscoveryService::new(doc, registry, snapshot, config))
}

pub fn router(service: Arc<DiscoveryService>) -> Router {
    Router::new()
        .route("/api/providers", get(providers))
        .route("/api/overviews", get(overviews))
        .route("/api/views/{type}/{name}", get(view))
        .route("/api/search", get(search))
        .route("/api/artifacts/{id}", get(artifact))
        .route("/api/artifacts/{id}/related", get(related))
        .route("/api/suggest", get(suggest))
        .route("/api/config/admin", get(get_admin).put(put_admin))
        .route("/api/config/team/{name}", get(get_team).put(put_team))
        .route("/api/config/user", get(get_user).put(put_user))
        .with_state(service)
}

type Svc = State<Arc<DiscoveryService>>;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl Into<String>) -> Self {
        ApiError { status, body: json!({"error": error, "message": message.into()}) }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.body[key] = value;
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

fn fetch_status(e: &FetchError) -> StatusCode {
    match e {
        FetchError::MissingInput { .. } | FetchError::InvalidInput { .. } => StatusCode::BAD_REQUEST,
        FetchError::ProviderUnavailable { .. } => StatusCode::SERVICE_UNAVAILABLE,
        _ => StatusCode::BAD_GATEWAY,
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let message = e.to_string();
        match e {
            ServiceError::UnknownArtifact(id) => {
                ApiError::new(StatusCode::NOT_FOUND, "UnknownArtifact", message).with("id", json!(id))
            }
            ServiceError::UnknownProvider(key) => {
                ApiError::new(StatusCode::NOT_FOUND, "UnknownProvider", message).with("provider", json!(key))
            }
            ServiceError::Query(q) => {
                ApiError::new(StatusCode::BAD_REQUEST, "ParseError", message).with("position", json!(q.position()))
            }
            ServiceError::Eval(EvalError::UnknownProvider { candidates, .. }) => {
                ApiError::new(StatusCode::BAD_REQUEST, "UnknownProvider", message)
                    .with("candidates", json!(candidates))
            }
            ServiceError::Eval(EvalError::MissingInput { provider, missing }) => {
                ApiError::new(StatusCode::BAD_REQUEST, "MissingInput", message)
                    .with("provider", json!(provider))
                    .with("missing", json!(missing))
            }
            ServiceError::Eval(EvalError::Fetch(f)) | ServiceError::Fetch(f) => {
                ApiError::new(fetch_status(&f), "FetchError", message).with("detail", json!(f))
            }
            ServiceError::Config(c) => c.into(),
        }
    }
}

impl From<ConfigError> for ApiError {
    fn from(e: ConfigError) -> Self {
        let message = e.to_string();
        match e {
            ConfigError::UnknownProviderReference(key) => {
                ApiError::new(StatusCode::BAD_REQUEST, "UnknownProviderReference", message)
                    .with("provider", json!(key))
            }
            ConfigError::UnauthorizedScope { .. } => ApiError::new(StatusCode::FORBIDDEN, "UnauthorizedScope", message),
            ConfigError::ScopeMismatch(_) => ApiError::new(StatusCode::BAD_REQUEST, "ScopeMismatch", message),
            ConfigError::Io(_) | ConfigError::Corrupt(_) => {
                tracing::error!(error = %message, "config persistence failed");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "ConfigPersistence", message)
            }
        }
    }
}

fn caller(headers: &HeaderMap) -> Result<Caller, ApiError> {
    let user_id = headers
        .get(USER_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .unwrap_or(ANONYMOUS)
        .to_string();
    let role = match headers.get(ROLE_HEADER) {
        None => Role::User,
        Some(v) => v
            .to_str()
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "InvalidRole", "unknown role header value"))?,
    };
    Ok(Caller { user_id, role })
}

#[derive(Deserialize)]
struct SurfaceParam {
    surface: Option<String>,
}

async fn providers(State(svc): Svc, headers: HeaderMap, Query(p): Query<SurfaceParam>) -> Result<Json<Value>, ApiError> {
    let caller = caller(&headers)?;
    let surfaces: Vec<Surface> = match p.surface.as_deref() {
        None | Some("") => Surface::ALL.to_vec(),
        Some(s) => vec![s.parse().map_err(|m: String| ApiError::new(StatusCode::BAD_REQUEST, "InvalidSurface", m))?],
    };
    // A provider is listed once, under its first matching surface order.
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for surface in surfaces {
        for spec in svc.providers(surface, &caller.user_id) {
            if seen.insert(spec.key()) {
                out.push(provider_to_value(&spec));
            }
        }
    }
    Ok(Json(Value::Array(out)))
}

async fn overviews(State(svc): Svc, headers: HeaderMap) -> Result<Json<Value>, ApiError> {
    let caller = caller(&headers)?;
    let views = svc.overviews(&caller.user_id).await;
    Ok(Json(json!(views)))
}

async fn view(
    State(svc): Svc,
    headers: HeaderMap,
    UrlPath((type_, name)): UrlPath<(String, String)>,
    Query(params): Query<HashMap<String, String>>,
) -> Result<Json<Value>, ApiError> {
    let caller = caller(&headers)?;
    let key = ProviderKey::new(type_, name);
    let spec = svc
        .registry()
        .get(&key)
        .map(|p| p.spec.clone())
        .ok_or_else(|| ServiceError::UnknownProvider(key.clone()))?;

    let selection = match params.get("selection") {
        Some(id) => {
            Some(svc.snapshot().get(id).cloned().ok_or_else(|| ServiceError::UnknownArtifact(id.clone()))?)
        }
        None => None,
    };
    let mut binding = bind_inputs(&spec, selection.as_ref(), &[]).unwrap_or_default();
    for (param, value) in &params {
        if let Some(input) = param.strip_prefix("input.") {
            let input = InputType::parse(input).ok_or_else(|| {
                ApiError::new(StatusCode::BAD_REQUEST, "InvalidInput", format!("unknown input type \"{input}\""))
            })?;
            binding.values.insert(input, value.clone());
        }
    }
    if spec.inputs.iter().any(|s| s.input_type == InputType::UserId) && binding.get(InputType::UserId).is_none() {
        binding = binding.with(InputType::UserId, caller.user_id.clone());
    }
    let query = params.get("q").map(String::as_str).unwrap_or("");
    let (spec, payload) = svc.filter_view(&key, query, &binding, &caller.user_id).await?;
    Ok(Json(json!({"provider": provider_to_value(&spec), "payload": payload})))
}

#[derive(Deserialize)]
struct SearchParams {
    #[serde(default)]
    q: String,
}

async fn search(State(svc): Svc, headers: HeaderMap, Query(p): Query<SearchParams>) -> Result<Json<Value>, ApiError> {
    let caller = caller(&headers)?;
    let ids = svc.search(&p.q, &caller.user_id).await?;
    let snapshot = svc.snapshot();
    let artifacts: Vec<Value> = ids
        .iter()
        .filter_map(|id| snapshot.get(id))
        .map(|a| json!({"id": a.id, "kind": a.kind, "name": a.name, "owner": a.owner(), "badges": a.badges()}))
        .collect();
    Ok(Json(json!({"query": p.q, "representation": "LIST", "ids": ids, "artifacts": artifacts})))
}

async fn artifact(State(svc): Svc, UrlPath(id): UrlPath<String>) -> Result<Json<Value>, ApiError> {
    let snapshot = svc.snapshot();
    let artifact = snapshot.get(&id).ok_or_else(|| ServiceError::UnknownArtifact(id.clone()))?;
    Ok(Json(json!(artifact)))
}

async fn related(State(svc): Svc, headers: HeaderMap, UrlPath(id): UrlPath<String>) -> Result<Json<Value>, ApiError> {
    let caller = caller(&headers)?;
    let views = svc.explore(&id, &caller.user_id).await?;
    Ok(Json(json!(views)))
}

#[derive(Deserialize)]
struct SuggestParams {
    #[serde(default)]
    q: String,
    cursor: Option<usize>,
}

async fn suggest(State(svc): Svc, headers: HeaderMap, Query(p): Query<SuggestParams>) -> Result<Json<Value>, ApiError> {
    let caller = caller(&headers)?;
    let cursor = p.cursor.unwrap_or(p.q.len());
    Ok(Json(json!(svc.suggest(&p.q, cursor, &caller.user_id))))
}

async fn get_admin(State(svc): Svc) -> Json<Value> {
    Json(json!(svc.config().admin))
}

async fn put_admin(State(svc): Svc, headers: HeaderMap, Json(body): Json<AdminConfig>) -> Result<Json<Value>, ApiError> {
    let caller = caller(&headers)?;
    let state = svc.update_config(&caller, ConfigScope::Admin, ConfigChange::Admin(body))?;
    Ok(Json(json!(state.admin)))
}

async fn get_team(State(svc): Svc, UrlPath(name): UrlPath<String>) -> Result<Json<Value>, ApiError> {
    let (team, warnings) = svc
        .team_config(&name)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "UnknownTeam", format!("no home page for team \"{name}\"")))?;
    Ok(Json(json!({"team": team.team, "home_providers": team.home_providers, "warnings": warnings})))
}

async fn put_team(
    State(svc): Svc,
    headers: HeaderMap,
    UrlPath(name): UrlPath<String>,
    Json(body): Json<TeamChange>,
) -> Result<Json<Value>, ApiError> {
    let caller = caller(&headers)?;
    let state = svc.update_config(&caller, ConfigScope::Team(name.clone()), ConfigChange::Team(body))?;
    Ok(Json(json!(state.teams.get(&name))))
}

async fn get_user(State(svc): Svc, headers: HeaderMap) -> Result<Json<Value>, ApiError> {
    let caller = caller(&headers)?;
    Ok(Json(json!(svc.user_config(&caller.user_id))))
}

async fn put_user(State(svc): Svc, headers: HeaderMap, Json(body): Json<UserChange>) -> Result<Json<Value>, ApiError> {
    let caller = caller(&headers)?;
    let scope = ConfigScope::User(caller.user_id.clone());
    let state = svc.update_config(&caller, scope, ConfigChange::User(body))?;
    Ok(Json(json!(state.users.get(&caller.user_id))))
}
