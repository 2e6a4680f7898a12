//! Weighted-sum scoring and deterministic, provider-combined rankings.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog::{CatalogSnapshot, DataArtifact, MetadataValue};
use crate::exec::Execution;
use crate::spec::{ProviderKey, ProviderSpec, RankingWeights, SpecDocument};

static NO_WEIGHTS: RankingWeights = RankingWeights { entries: Vec::new() };

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Score {
    pub value: f64,
    pub artifact_id: String,
}

impl Score {
    /// Higher values first, then ascending artifact id.
    pub fn rank_cmp(&self, other: &Score) -> Ordering {
        // Adding 0.0 folds -0.0 into +0.0 so total_cmp treats them as equal.
        (other.value + 0.0)
            .total_cmp(&(self.value + 0.0))
            .then_with(|| self.artifact_id.cmp(&other.artifact_id))
    }
}

/// The provider's own weights, else the global ones, else none.
pub fn effective_weights<'a>(spec: &'a ProviderSpec, global: Option<&'a RankingWeights>) -> &'a RankingWeights {
    spec.ranking.as_ref().or(global).unwrap_or(&NO_WEIGHTS)
}

/// Numeric contribution of a metadata value: numbers as-is, booleans as
/// 1/0, everything else (including timestamps) 0.
pub fn numeric(value: Option<&MetadataValue>) -> f64 {
    match value {
        Some(MetadataValue::Number(n)) => *n,
        Some(MetadataValue::Boolean(true)) => 1.0,
        _ => 0.0,
    }
}

pub fn score_value(artifact: &DataArtifact, weights: &RankingWeights) -> f64 {
    weights
        .entries
        .iter()
        .fold(0.0, |acc, entry| acc + entry.weight * numeric(artifact.fields.get(&entry.field)))
}

pub fn score_artifact(artifact: &DataArtifact, weights: &RankingWeights) -> Score {
    Score { value: score_value(artifact, weights), artifact_id: artifact.id.clone() }
}

/// Whose weights apply to one appearance of an artifact in a result.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Contributor {
    Provider(ProviderKey),
    /// The document's global weights.
    Global,
}

/// Orders artifacts by the sum of their per-contributor scores, highest
/// first, ties broken by ascending id. Repeated ids are merged and their
/// contributors concatenated.
pub fn rank(
    results: &[(String, Vec<Contributor>)],
    snapshot: &CatalogSnapshot,
    doc: &SpecDocument,
    global: Option<&RankingWeights>,
) -> Vec<String> {
    rank_with(results, snapshot, doc, global, Execution::default())
}

pub fn rank_with(
    results: &[(String, Vec<Contributor>)],
    snapshot: &CatalogSnapshot,
    doc: &SpecDocument,
    global: Option<&RankingWeights>,
    exec: Execution,
) -> Vec<String> {
    let mut merged: BTreeMap<&str, Vec<&Contributor>> = BTreeMap::new();
    for (id, contributors) in results {
        merged.entry(id.as_str()).or_default().extend(contributors);
    }
    let entries: Vec<(&str, Vec<&Contributor>)> = merged.into_iter().collect();
    let weights_for = |c: &Contributor| -> &RankingWeights {
        match c {
            Contributor::Global => global.unwrap_or(&NO_WEIGHTS),
            Contributor::Provider(key) => match doc.provider(key) {
                Some(spec) => effective_weights(spec, global),
                None => global.unwrap_or(&NO_WEIGHTS),
            },
        }
    };
    let mut scores: Vec<Score> = exec.map(&entries, |(id, contributors)| {
        let value = match snapshot.get(id) {
            Some(artifact) => contributors.iter().fold(0.0, |acc, c| acc + score_value(artifact, weights_for(c))),
            None => 0.0,
        };
        Score { value, artifact_id: id.to_string() }
    });
    scores.sort_by(Score::rank_cmp);
    scores.into_iter().map(|s| s.artifact_id).collect()
}
