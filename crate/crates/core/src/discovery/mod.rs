//! Orchestration: overviews, exploration, global search, view filtering
//! and configuration, on top of one spec document, provider registry and
//! catalog snapshot.

mod config;

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use futures::future::join_all;
use parking_lot::RwLock;
use serde::Serialize;

use crate::catalog::CatalogSnapshot;
use crate::provider::{
    bind_inputs, FetchError, InputBinding, ProviderRegistry, RepresentationPayload,
};
use crate::query::{evaluate_resolved, parse_query, resolve_calls, EvalError, QueryError};
use crate::ranking::{rank_with, Contributor};
use crate::spec::{
    provider_to_value, resolve_custom_content, ContentWarning, InputType, ProviderKey, ProviderSpec, SpecDocument,
    Surface,
};

pub use config::{
    AdminConfig, Caller, ConfigChange, ConfigError, ConfigScope, ConfigState, ConfigStore, Role, TeamChange,
    TeamConfig, UserChange, UserConfig,
};

/// One provider view: the provider and its payload, or the error that
/// kept it from loading.
#[derive(Debug, Clone)]
pub struct View {
    pub provider: ProviderSpec,
    pub result: Result<RepresentationPayload, FetchError>,
}

impl Serialize for View {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("View", 3)?;
        s.serialize_field("provider", &provider_to_value(&self.provider))?;
        match &self.result {
            Ok(payload) => {
                s.serialize_field("payload", payload)?;
                s.skip_field("error")?;
            }
            Err(error) => {
                s.skip_field("payload")?;
                s.serialize_field("error", &ViewError { message: error.to_string(), detail: error })?;
            }
        }
        s.end()
    }
}

#[derive(Serialize)]
struct ViewError<'a> {
    message: String,
    detail: &'a FetchError,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown artifact \"{0}\"")]
    UnknownArtifact(String),
    #[error("unknown provider {0}")]
    UnknownProvider(ProviderKey),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug)]
pub struct DiscoveryService {
    doc: Arc<SpecDocument>,
    registry: Arc<ProviderRegistry>,
    catalog: RwLock<Arc<CatalogSnapshot>>,
    config: ConfigStore,
}

impl DiscoveryService {
    pub fn new(doc: SpecDocument, registry: ProviderRegistry, catalog: CatalogSnapshot, config: ConfigStore) -> Self {
        DiscoveryService {
            doc: Arc::new(doc),
            registry: Arc::new(registry),
            catalog: RwLock::new(Arc::new(catalog)),
            config,
        }
    }

    pub fn doc(&self) -> &SpecDocument {
        &self.doc
    }

    pub fn registry(&self) -> &ProviderRegistry {
        &self.registry
    }

    /// The current catalog. Callers keep the snapshot they got even if the
    /// catalog is replaced meanwhile.
    pub fn snapshot(&self) -> Arc<CatalogSnapshot> {
        self.catalog.read().clone()
    }

    pub fn replace_catalog(&self, catalog: CatalogSnapshot) {
        *self.catalog.write() = Arc::new(catalog);
    }

    pub fn config(&self) -> Arc<ConfigState> {
        self.config.snapshot()
    }

    pub fn user_config(&self, user_id: &str) -> UserConfig {
        self.config().users.get(user_id).cloned().unwrap_or_else(|| UserConfig::new(user_id))
    }

    /// The team's home page: its stored configuration if there is one,
    /// else the spec's custom content. `None` when neither defines it.
    pub fn team_config(&self, team: &str) -> Option<(TeamConfig, Vec<ContentWarning>)> {
        if let Some(stored) = self.config().teams.get(team) {
            return Some((stored.clone(), Vec::new()));
        }
        let resolved = resolve_custom_content(&self.doc);
        let page = resolved.pages.get(team)?;
        let warnings = resolved
            .warnings
            .iter()
            .filter(|w| match w {
                ContentWarning::UnresolvedReference { team: t, .. }
                | ContentWarning::AmbiguousReference { team: t, .. }
                | ContentWarning::DuplicateTeamPage { team: t } => t == team,
            })
            .cloned()
            .collect();
        Some((TeamConfig { team: team.to_string(), home_providers: page.iter().map(|p| p.key()).collect() }, warnings))
    }

    /// Neither disabled by the admin nor hidden by the user.
    fn allowed_for(&self, state: &ConfigState, user: &UserConfig, key: &ProviderKey) -> bool {
        !state.admin.disabled_providers.contains(key) && !user.hides(key)
    }

    fn excluded_for(&self, user: &UserConfig) -> HashSet<ProviderKey> {
        let state = self.config();
        self.registry
            .specs()
            .map(ProviderSpec::key)
            .filter(|k| !self.allowed_for(&state, user, k))
            .collect()
    }

    /// Providers visible to the user on `surface`, in the user's order.
    pub fn providers(&self, surface: Surface, user_id: &str) -> Vec<ProviderSpec> {
        let state = self.config();
        let user = self.user_config(user_id);
        let specs: Vec<ProviderSpec> = self
            .registry
            .specs()
            .filter(|s| s.effective_visibility(surface) && self.allowed_for(&state, &user, &s.key()))
            .cloned()
            .collect();
        user.arrange(specs, ProviderSpec::key)
    }

    pub async fn overviews(&self, user_id: &str) -> Vec<View> {
        let state = self.config();
        let user = self.user_config(user_id);
        let snapshot = self.snapshot();

        let team_page = user.team.as_deref().and_then(|team| self.team_config(team));
        let specs: Vec<ProviderSpec> = match team_page {
            Some((page, _)) => page
                .home_providers
                .iter()
                .filter_map(|key| {
                    let found = self.registry.get(key);
                    if found.is_none() {
                        tracing::warn!(%key, "team home page references an unregistered provider");
                    }
                    found.map(|p| p.spec.clone())
                })
                .collect(),
            None => self
                .registry
                .applicable_providers(Surface::Discovery, None)
                .into_iter()
                .cloned()
                .collect(),
        };
        let specs: Vec<ProviderSpec> =
            specs.into_iter().filter(|s| self.allowed_for(&state, &user, &s.key())).collect();
        let specs = user.arrange(specs, ProviderSpec::key);

        let fetches = specs.into_iter().map(|spec| {
            let snapshot = snapshot.clone();
            async move {
                let result = match bind_for_user(&spec, user_id) {
                    Ok(binding) => self.registry.fetch(&spec.key(), &binding, &snapshot).await,
                    Err(e) => Err(e),
                };
                View { provider: spec, result }
            }
        });
        join_all(fetches).await
    }

    pub async fn explore(&self, artifact_id: &str, user_id: &str) -> Result<Vec<View>, ServiceError> {
        let snapshot = self.snapshot();
        let artifact = snapshot.get(artifact_id).ok_or_else(|| ServiceError::UnknownArtifact(artifact_id.into()))?;
        let state = self.config();
        let user = self.user_config(user_id);
        let specs: Vec<ProviderSpec> = self
            .registry
            .applicable_providers(Surface::Exploration, Some(artifact))
            .into_iter()
            .filter(|s| self.allowed_for(&state, &user, &s.key()))
            .cloned()
            .collect();
        let specs = user.arrange(specs, ProviderSpec::key);
        let fetches = specs.into_iter().map(|spec| {
            let snapshot = &snapshot;
            async move {
                let result = match bind_inputs(&spec, Some(artifact), &[]) {
                    Ok(binding) => self.registry.fetch(&spec.key(), &binding, snapshot).await,
                    Err(m) => Err(FetchError::MissingInput { provider: Some(spec.key()), missing: m.missing }),
                };
                View { provider: spec, result }
            }
        });
        Ok(join_all(fetches).await)
    }

    /// Global search: evaluates against the whole catalog and ranks the
    /// matches. An artifact found through provider calls is scored with
    /// those providers' weights, anything else with the global weights.
    pub async fn search(&self, query: &str, user_id: &str) -> Result<Vec<String>, ServiceError> {
        let ast = parse_query(query)?;
        let snapshot = self.snapshot();
        let scope: BTreeSet<String> = snapshot.ids().cloned().collect();
        let state = self.config();
        let user = self.user_config(user_id);
        let exec = self.registry.execution();

        let (ids, calls) = match &ast {
            None => (scope, Default::default()),
            Some(ast) => {
                let calls =
                    resolve_calls(ast, &self.registry, &snapshot, |s| self.allowed_for(&state, &user, &s.key()))
                        .await?;
                (evaluate_resolved(ast, &scope, &snapshot, &calls, exec)?, calls)
            }
        };
        let outcomes: Vec<_> = calls.results.values().collect();
        let results: Vec<(String, Vec<Contributor>)> = ids
            .into_iter()
            .map(|id| {
                let mut from_calls: Vec<Contributor> = outcomes
                    .iter()
                    .filter(|o| o.ids.contains(&id))
                    .map(|o| Contributor::Provider(o.provider.clone()))
                    .collect();
                from_calls.dedup();
                if from_calls.is_empty() {
                    from_calls.push(Contributor::Global);
                }
                (id, from_calls)
            })
            .collect();
        Ok(rank_with(&results, &snapshot, &self.doc, self.doc.global_ranking.as_ref(), exec))
    }

    /// Fetches one provider's view and narrows it to what `query` matches
    /// within that view.
    pub async fn filter_view(
        &self,
        key: &ProviderKey,
        query: &str,
        binding: &InputBinding,
        user_id: &str,
    ) -> Result<(ProviderSpec, RepresentationPayload), ServiceError> {
        let state = self.config();
        let user = self.user_config(user_id);
        let provider = self
            .registry
            .get(key)
            .filter(|_| self.allowed_for(&state, &user, key))
            .ok_or_else(|| ServiceError::UnknownProvider(key.clone()))?;
        let ast = parse_query(query)?;
        let snapshot = self.snapshot();
        let payload = self.registry.fetch(key, binding, &snapshot).await?;
        let Some(ast) = ast else {
            return Ok((provider.spec.clone(), payload));
        };
        let scope: BTreeSet<String> = payload.artifact_ids().into_iter().map(str::to_string).collect();
        let calls =
            resolve_calls(&ast, &self.registry, &snapshot, |s| self.allowed_for(&state, &user, &s.key())).await?;
        let keep = evaluate_resolved(&ast, &scope, &snapshot, &calls, self.registry.execution())?;
        Ok((provider.spec.clone(), payload.prune(&keep)))
    }

    pub fn suggest(&self, partial: &str, cursor: usize, user_id: &str) -> Vec<crate::query::Suggestion> {
        let user = self.user_config(user_id);
        crate::query::suggest_with(partial, cursor, &self.doc, &self.snapshot(), &self.excluded_for(&user))
    }

    pub fn update_config(
        &self,
        caller: &Caller,
        scope: ConfigScope,
        change: ConfigChange,
    ) -> Result<Arc<ConfigState>, ServiceError> {
        Ok(self.config.update(caller, scope, change, &self.registry)?)
    }
}

/// Overview binding: a USERID slot takes the viewing user, other required
/// slots cannot be filled without a selection.
fn bind_for_user(spec: &ProviderSpec, user_id: &str) -> Result<InputBinding, FetchError> {
    let mut binding = InputBinding::default();
    let mut missing = Vec::new();
    for slot in &spec.inputs {
        match slot.input_type {
            InputType::UserId => {
                binding.values.insert(InputType::UserId, user_id.to_string());
            }
            other if slot.required => missing.push(other),
            _ => {}
        }
    }
    if missing.is_empty() {
        Ok(binding)
    } else {
        Err(FetchError::MissingInput { provider: Some(spec.key()), missing })
    }
}
