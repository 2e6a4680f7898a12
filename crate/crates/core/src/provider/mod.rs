//! Provider registration, applicability, input binding and fetching.

mod builtin;
mod http;
mod payload;

use std::collections::{BTreeMap, HashMap};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use url::Url;

use crate::catalog::{CatalogSnapshot, DataArtifact};
use crate::exec::Execution;
use crate::spec::{InputType, ProviderKey, ProviderSpec, Representation, SpecDocument, Surface};

pub use builtin::{eval_builtin, name_joinable, Builtin, BuiltinKind, BuiltinTable};
pub use http::{ProviderRequest, DEFAULT_TIMEOUT};
pub use payload::{Edge, PayloadItem, RepresentationPayload};

use http::{HttpBackend, HttpFailure};

/// Provider category whose TEXT input is the selection's kind.
pub const TYPE_CATEGORY: &str = "type";
/// Provider category whose TEXT input is the selection's first badge.
pub const BADGED_CATEGORY: &str = "badged";

#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize)]
#[serde(tag = "kind")]
pub enum FetchError {
    #[error("provider unavailable: {reason}")]
    ProviderUnavailable { provider: Option<ProviderKey>, reason: String },
    #[error("provider returned {actual} but declares {expected}")]
    RepresentationMismatch { provider: Option<ProviderKey>, expected: Representation, actual: Representation },
    #[error("provider referenced unknown artifact \"{id}\"")]
    DanglingArtifact { provider: Option<ProviderKey>, id: String },
    #[error("invalid provider payload: {reason}")]
    InvalidPayload { provider: Option<ProviderKey>, reason: String },
    #[error("invalid provider input: {reason}")]
    InvalidInput { provider: Option<ProviderKey>, reason: String },
    #[error("missing required input(s): {}", list_inputs(.missing))]
    MissingInput { provider: Option<ProviderKey>, missing: Vec<InputType> },
}

fn list_inputs(inputs: &[InputType]) -> String {
    inputs.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(", ")
}

impl FetchError {
    fn for_provider(mut self, key: &ProviderKey) -> Self {
        let slot = match &mut self {
            FetchError::ProviderUnavailable { provider, .. }
            | FetchError::RepresentationMismatch { provider, .. }
            | FetchError::DanglingArtifact { provider, .. }
            | FetchError::InvalidPayload { provider, .. }
            | FetchError::InvalidInput { provider, .. }
            | FetchError::MissingInput { provider, .. } => provider,
        };
        slot.get_or_insert_with(|| key.clone());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("no built-in provider named {0}")]
    UnknownBuiltin(ProviderKey),
    #[error("built-in {builtin} cannot produce {declared} for {key}")]
    IncompatibleBuiltin { key: ProviderKey, builtin: &'static str, declared: Representation },
}

/// Values bound to a provider's input slots.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InputBinding {
    pub values: BTreeMap<InputType, String>,
}

impl InputBinding {
    pub fn get(&self, input: InputType) -> Option<&str> {
        self.values.get(&input).map(String::as_str)
    }

    pub fn with(mut self, input: InputType, value: impl Into<String>) -> Self {
        self.values.insert(input, value.into());
        self
    }

    /// Required slots of `spec` without a value.
    pub fn missing_for(&self, spec: &ProviderSpec) -> Vec<InputType> {
        spec.required_inputs().filter(|t| !self.values.contains_key(t)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingInput {
    pub missing: Vec<InputType>,
}

/// The value a selection supplies for an input slot of `spec`, if any.
pub fn derive_input(spec: &ProviderSpec, input: InputType, selection: &DataArtifact) -> Option<String> {
    match input {
        InputType::TableId => selection.is_table().then(|| selection.id.clone()),
        InputType::UserId => selection.owner().map(str::to_string),
        InputType::Text => match spec.type_.as_str() {
            TYPE_CATEGORY => Some(selection.kind.clone()),
            BADGED_CATEGORY => selection.badges().first().cloned(),
            _ => Some(selection.name.clone()),
        },
    }
}

/// Fills the provider's slots in declaration order. Each slot takes the
/// next explicit argument if one is left, otherwise a value derived from
/// the selection.
pub fn bind_inputs(
    spec: &ProviderSpec,
    selection: Option<&DataArtifact>,
    free_args: &[String],
) -> Result<InputBinding, MissingInput> {
    let mut args = free_args.iter();
    let mut binding = InputBinding::default();
    let mut missing = Vec::new();
    for slot in &spec.inputs {
        let value = args
            .next()
            .cloned()
            .or_else(|| selection.and_then(|sel| derive_input(spec, slot.input_type, sel)));
        match value {
            Some(v) => {
                binding.values.insert(slot.input_type, v);
            }
            None if slot.required => missing.push(slot.input_type),
            None => {}
        }
    }
    if missing.is_empty() {
        Ok(binding)
    } else {
        Err(MissingInput { missing })
    }
}

#[derive(Debug, Clone)]
pub enum Backend {
    Http { endpoint: String },
    Builtin(Builtin),
}

#[derive(Debug, Clone)]
pub struct RegisteredProvider {
    pub spec: ProviderSpec,
    pub backend: Backend,
}

#[derive(Debug, Clone)]
pub struct RegistryOptions {
    /// Base URL relative endpoints are resolved against.
    pub provider_base: Option<Url>,
    pub timeout: Duration,
    pub builtins: BuiltinTable,
    pub execution: Execution,
}

impl Default for RegistryOptions {
    fn default() -> Self {
        RegistryOptions {
            provider_base: None,
            timeout: DEFAULT_TIMEOUT,
            builtins: BuiltinTable::standard(),
            execution: Execution::default(),
        }
    }
}

/// Read-only map from provider key to its backend, in document order.
#[derive(Debug, Clone)]
pub struct ProviderRegistry {
    providers: Vec<RegisteredProvider>,
    index: HashMap<ProviderKey, usize>,
    http: HttpBackend,
    execution: Execution,
}

pub fn register_providers(doc: &SpecDocument) -> Result<ProviderRegistry, RegistryError> {
    ProviderRegistry::new(doc, RegistryOptions::default())
}

impl ProviderRegistry {
    pub fn new(doc: &SpecDocument, options: RegistryOptions) -> Result<Self, RegistryError> {
        let mut providers = Vec::with_capacity(doc.providers.len());
        let mut index = HashMap::new();
        for spec in &doc.providers {
            let key = spec.key();
            let backend = match &spec.endpoint {
                Some(endpoint) => Backend::Http { endpoint: endpoint.clone() },
                None => {
                    let builtin =
                        options.builtins.get(&key).ok_or_else(|| RegistryError::UnknownBuiltin(key.clone()))?;
                    if !builtin.kind.supports(spec.representation) {
                        return Err(RegistryError::IncompatibleBuiltin {
                            key,
                            builtin: builtin.kind.id(),
                            declared: spec.representation,
                        });
                    }
                    Backend::Builtin(builtin.clone())
                }
            };
            index.insert(key, providers.len());
            providers.push(RegisteredProvider { spec: spec.clone(), backend });
        }
        Ok(ProviderRegistry {
            providers,
            index,
            http: HttpBackend::new(options.provider_base, options.timeout),
            execution: options.execution,
        })
    }

    pub fn len(&self) -> usize {
        self.providers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.providers.is_empty()
    }

    pub fn providers(&self) -> impl Iterator<Item = &RegisteredProvider> {
        self.providers.iter()
    }

    pub fn specs(&self) -> impl Iterator<Item = &ProviderSpec> {
        self.providers.iter().map(|p| &p.spec)
    }

    pub fn get(&self, key: &ProviderKey) -> Option<&RegisteredProvider> {
        self.index.get(key).map(|&i| &self.providers[i])
    }

    pub fn contains(&self, key: &ProviderKey) -> bool {
        self.index.contains_key(key)
    }

    pub fn execution(&self) -> Execution {
        self.execution
    }

    /// Providers visible on `surface` whose required inputs can all be
    /// bound from `selection`. Without a selection only providers with no
    /// required input qualify.
    pub fn applicable_providers(&self, surface: Surface, selection: Option<&DataArtifact>) -> Vec<&ProviderSpec> {
        self.specs()
            .filter(|spec| spec.effective_visibility(surface))
            .filter(|spec| {
                spec.required_inputs().all(|input| selection.is_some_and(|sel| derive_input(spec, input, sel).is_some()))
            })
            .collect()
    }

    /// Fetches one provider's payload and checks it against its spec and
    /// the catalog.
    pub async fn fetch(
        &self,
        key: &ProviderKey,
        binding: &InputBinding,
        snapshot: &CatalogSnapshot,
    ) -> Result<RepresentationPayload, FetchError> {
        let provider = self.get(key).ok_or_else(|| FetchError::ProviderUnavailable {
            provider: Some(key.clone()),
            reason: "provider is not registered".into(),
        })?;
        self.fetch_registered(provider, binding, snapshot).await.map_err(|e| e.for_provider(key))
    }

    async fn fetch_registered(
        &self,
        provider: &RegisteredProvider,
        binding: &InputBinding,
        snapshot: &CatalogSnapshot,
    ) -> Result<RepresentationPayload, FetchError> {
        let spec = &provider.spec;
        let missing = binding.missing_for(spec);
        if !missing.is_empty() {
            return Err(FetchError::MissingInput { provider: None, missing });
        }
        let mut payload = match &provider.backend {
            Backend::Http { endpoint } => self.http.post(endpoint, binding).await.map_err(|f| match f {
                HttpFailure::Unavailable(reason) => FetchError::ProviderUnavailable { provider: None, reason },
                HttpFailure::InvalidPayload(reason) => FetchError::InvalidPayload { provider: None, reason },
            })?,
            Backend::Builtin(builtin) => {
                let mut payload = builtin::eval_with_preset(builtin, binding, snapshot, self.execution)?;
                // List-shaped builtins may be declared as tiles.
                payload.representation = spec.representation;
                payload
            }
        };
        if payload.representation != spec.representation {
            return Err(FetchError::RepresentationMismatch {
                provider: None,
                expected: spec.representation,
                actual: payload.representation,
            });
        }
        payload.fill_structure();
        payload.check_structure().map_err(|reason| FetchError::InvalidPayload { provider: None, reason })?;
        if let Some(id) = payload.find_dangling(snapshot) {
            return Err(FetchError::DanglingArtifact { provider: None, id });
        }
        Ok(payload)
    }
}

/// Normalized lookup form of a provider name: lowercase, with spaces and
/// hyphens collapsed to underscores.
pub fn provider_alias(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.trim().chars() {
        if c == ' ' || c == '-' || c == '_' {
            if !out.ends_with('_') {
                out.push('_');
            }
        } else {
            out.extend(c.to_lowercase());
        }
    }
    out
}
