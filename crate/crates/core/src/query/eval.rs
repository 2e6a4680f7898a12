use std::collections::{BTreeSet, HashMap};

use futures::future::join_all;

use crate::catalog::{fold_case, matches_folded, CatalogSnapshot};
use crate::exec::Execution;
use crate::provider::{bind_inputs, provider_alias, FetchError, InputBinding, ProviderRegistry};
use crate::spec::{InputType, ProviderKey, ProviderSpec, Surface};

use super::fields::{field_matches, resolve_field};
use super::QueryAst;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unknown provider \":{name}\"")]
    UnknownProvider { name: String, candidates: Vec<ProviderKey> },
    #[error("provider {provider} is missing input(s) {missing:?}")]
    MissingInput { provider: ProviderKey, missing: Vec<InputType> },
    #[error(transparent)]
    Fetch(#[from] FetchError),
}

/// Artifacts matched by a query, always a subset of the scope it was
/// evaluated against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultSet {
    pub ids: BTreeSet<String>,
    pub scope: BTreeSet<String>,
}

/// A provider call as written in a query: name (or alias) and arguments.
pub type CallKey = (String, Vec<String>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallOutcome {
    pub provider: ProviderKey,
    pub ids: BTreeSet<String>,
}

/// Provider results for every call in a query, fetched before the set
/// algebra runs.
#[derive(Debug, Clone, Default)]
pub struct CallResults {
    pub results: HashMap<CallKey, CallOutcome>,
}

impl CallResults {
    pub fn insert(&mut self, provider: &str, args: &[String], outcome: CallOutcome) {
        self.results.insert((provider.to_string(), args.to_vec()), outcome);
    }

    pub fn get(&self, provider: &str, args: &[String]) -> Option<&CallOutcome> {
        // Tuple keys cannot be borrowed piecewise; queries hold few calls.
        self.results.iter().find(|((p, a), _)| p == provider && a == args).map(|(_, o)| o)
    }
}

pub fn collect_calls(ast: &QueryAst) -> Vec<(&str, &[String])> {
    let mut out = Vec::new();
    let mut stack = vec![ast];
    while let Some(node) = stack.pop() {
        match node {
            QueryAst::ProviderCall { provider, args } => {
                let call = (provider.as_str(), args.as_slice());
                if !out.contains(&call) {
                    out.push(call);
                }
            }
            QueryAst::And(l, r) | QueryAst::Or(l, r) => {
                stack.push(r);
                stack.push(l);
            }
            QueryAst::Not(c) | QueryAst::Group(c) => stack.push(c),
            QueryAst::Keyword(_) | QueryAst::FieldPill { .. } => {}
        }
    }
    out
}

/// Finds the provider a call names. `written` is matched against provider
/// names after alias normalization; `type/name` qualifies the category.
pub fn find_provider<'a>(
    specs: impl IntoIterator<Item = &'a ProviderSpec>,
    written: &str,
) -> Result<&'a ProviderSpec, EvalError> {
    let (type_filter, name) = match written.split_once('/') {
        Some((t, n)) => (Some(provider_alias(t)), n),
        None => (None, written),
    };
    let wanted = provider_alias(name);
    let matches: Vec<&ProviderSpec> = specs
        .into_iter()
        .filter(|s| provider_alias(&s.name) == wanted)
        .filter(|s| type_filter.as_ref().is_none_or(|t| provider_alias(&s.type_) == *t))
        .collect();
    match matches.as_slice() {
        [only] => Ok(only),
        _ => Err(EvalError::UnknownProvider {
            name: written.to_string(),
            candidates: matches.iter().map(|s| s.key()).collect(),
        }),
    }
}

/// Fetches every provider call in `ast`, concurrently. Only providers
/// visible on the search surface and accepted by `allowed` can be called.
pub async fn resolve_calls(
    ast: &QueryAst,
    registry: &ProviderRegistry,
    snapshot: &CatalogSnapshot,
    allowed: impl Fn(&ProviderSpec) -> bool,
) -> Result<CallResults, EvalError> {
    let candidates: Vec<&ProviderSpec> =
        registry.specs().filter(|s| s.effective_visibility(Surface::Search) && allowed(s)).collect();
    let mut planned: Vec<(&str, &[String], ProviderKey, InputBinding)> = Vec::new();
    for (written, args) in collect_calls(ast) {
        let spec = find_provider(candidates.iter().copied(), written)?;
        let binding = bind_inputs(spec, None, args)
            .map_err(|m| EvalError::MissingInput { provider: spec.key(), missing: m.missing })?;
        planned.push((written, args, spec.key(), binding));
    }

    // Calls that resolve to the same provider and binding share one fetch.
    let mut unique: Vec<(&ProviderKey, &InputBinding)> = Vec::new();
    for (_, _, key, binding) in &planned {
        if !unique.contains(&(key, binding)) {
            unique.push((key, binding));
        }
    }
    let fetched = join_all(unique.iter().map(|(key, binding)| registry.fetch(key, binding, snapshot))).await;
    let mut by_call = HashMap::new();
    for ((key, binding), result) in unique.into_iter().zip(fetched) {
        let ids: BTreeSet<String> = result?.artifact_ids().into_iter().map(str::to_string).collect();
        by_call.insert((key.clone(), binding.clone()), ids);
    }

    let mut out = CallResults::default();
    for (written, args, key, binding) in planned {
        let ids = by_call[&(key.clone(), binding)].clone();
        out.insert(written, args, CallOutcome { provider: key, ids });
    }
    Ok(out)
}

/// Pure set evaluation against pre-fetched provider results.
pub fn evaluate_resolved(
    ast: &QueryAst,
    scope: &BTreeSet<String>,
    snapshot: &CatalogSnapshot,
    calls: &CallResults,
    exec: Execution,
) -> Result<BTreeSet<String>, EvalError> {
    Ok(match ast {
        QueryAst::Keyword(text) => {
            let needle = fold_case(text.trim());
            filter_scope(scope, exec, |id| snapshot.get(id).is_some_and(|a| matches_folded(a, &needle)))
        }
        QueryAst::FieldPill { field, value } => {
            let field = resolve_field(field);
            let folded = fold_case(value);
            filter_scope(scope, exec, |id| snapshot.get(id).is_some_and(|a| field_matches(a, field, &folded, value)))
        }
        QueryAst::ProviderCall { provider, args } => {
            let outcome = calls
                .get(provider, args)
                .ok_or_else(|| EvalError::UnknownProvider { name: provider.clone(), candidates: vec![] })?;
            outcome.ids.intersection(scope).cloned().collect()
        }
        QueryAst::And(l, r) => {
            let left = evaluate_resolved(l, scope, snapshot, calls, exec)?;
            if left.is_empty() {
                return Ok(left);
            }
            // The right side only needs to look at what survived the left.
            evaluate_resolved(r, &left, snapshot, calls, exec)?
        }
        QueryAst::Or(l, r) => {
            let mut left = evaluate_resolved(l, scope, snapshot, calls, exec)?;
            left.extend(evaluate_resolved(r, scope, snapshot, calls, exec)?);
            left
        }
        QueryAst::Not(child) => {
            let inner = evaluate_resolved(child, scope, snapshot, calls, exec)?;
            scope.difference(&inner).cloned().collect()
        }
        QueryAst::Group(child) => evaluate_resolved(child, scope, snapshot, calls, exec)?,
    })
}

fn filter_scope(scope: &BTreeSet<String>, exec: Execution, keep: impl Fn(&str) -> bool + Send + Sync) -> BTreeSet<String> {
    let ids: Vec<&String> = scope.iter().collect();
    exec.filter(&ids, |id| keep(id)).into_iter().cloned().collect()
}

/// Evaluates a query (or the empty query, `None`, which matches the whole
/// scope) after fetching the provider calls it contains.
pub async fn evaluate(
    ast: Option<&QueryAst>,
    scope: &BTreeSet<String>,
    snapshot: &CatalogSnapshot,
    registry: &ProviderRegistry,
) -> Result<ResultSet, EvalError> {
    let ids = match ast {
        None => scope.clone(),
        Some(ast) => {
            let calls = resolve_calls(ast, registry, snapshot, |_| true).await?;
            evaluate_resolved(ast, scope, snapshot, &calls, registry.execution())?
        }
    };
    Ok(ResultSet { ids, scope: scope.clone() })
}
