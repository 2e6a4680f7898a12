//! Context-sensitive completions for a partially typed query.

use std::collections::HashSet;
use std::ops::Range;

use serde::Serialize;

use crate::catalog::CatalogSnapshot;
use crate::provider::{provider_alias, BADGED_CATEGORY, TYPE_CATEGORY};
use crate::spec::{InputType, ProviderKey, ProviderSpec, SpecDocument, Surface};

use super::fields::{distinct_values, field_names, resolve_field, FieldRef};
use super::lexer::{is_ident_char, tokenize, TokenKind};
use super::printer::quote_value;

pub const MAX_VALUE_SUGGESTIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuggestionKind {
    Field,
    Provider,
    Value,
    Hint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Suggestion {
    pub kind: SuggestionKind,
    /// What the UI shows.
    pub label: String,
    /// Text that replaces `replace` in the query.
    pub insert: String,
    pub replace: Range<usize>,
}

pub fn suggest(partial: &str, cursor: usize, doc: &SpecDocument, snapshot: &CatalogSnapshot) -> Vec<Suggestion> {
    suggest_with(partial, cursor, doc, snapshot, &HashSet::new())
}

/// Like [`suggest`], never offering providers in `excluded` (or any
/// provider hidden from the search surface).
pub fn suggest_with(
    partial: &str,
    cursor: usize,
    doc: &SpecDocument,
    snapshot: &CatalogSnapshot,
    excluded: &HashSet<ProviderKey>,
) -> Vec<Suggestion> {
    let mut cursor = cursor.min(partial.len());
    while !partial.is_char_boundary(cursor) {
        cursor -= 1;
    }
    let text = &partial[..cursor];
    let providers: Vec<&ProviderSpec> = doc
        .providers
        .iter()
        .filter(|p| p.effective_visibility(Surface::Search) && !excluded.contains(&p.key()))
        .collect();

    // The word under the cursor: an open quote or a run of identifier chars.
    let (word_start, word, quoted) = match tokenize(text) {
        Err(e) if text[e.position..].starts_with(['\'', '"']) => (e.position, &text[e.position + 1..], true),
        Err(_) => return Vec::new(),
        Ok(_) => {
            let start = text
                .char_indices()
                .rev()
                .take_while(|(_, c)| is_ident_char(*c))
                .last()
                .map_or(cursor, |(i, _)| i);
            (start, &text[start..], false)
        }
    };
    let replace = word_start..cursor;
    let before = &text[..word_start];

    // `:prefix` → provider names.
    if !quoted && before.ends_with(':') && !before[..before.len() - 1].ends_with(is_ident_char) {
        return provider_suggestions(&providers, word, (word_start)..cursor, false);
    }

    let Ok(tokens) = tokenize(before) else { return Vec::new() };
    let kinds: Vec<&TokenKind> = tokens.iter().map(|t| &t.kind).collect();

    if let [.., TokenKind::Ident(field), TokenKind::Colon] = kinds.as_slice() {
        let values = distinct_values(snapshot, resolve_field(field));
        return value_suggestions(values, word, replace);
    }

    if let Some(provider) = open_call(&kinds) {
        let Ok(spec) = crate::query::eval::find_provider(providers.iter().copied(), provider) else {
            return Vec::new();
        };
        let arg_index = kinds.iter().rev().take_while(|k| !matches!(k, TokenKind::LParen)).filter(|k| matches!(k, TokenKind::Comma)).count();
        let Some(slot) = spec.inputs.get(arg_index) else { return Vec::new() };
        let values = input_values(spec, slot.input_type, snapshot);
        return value_suggestions(values, word, replace);
    }

    let mut out = Vec::new();
    let lower = word.to_lowercase();
    if !quoted {
        for name in field_names(snapshot).into_iter().filter(|f| f.to_lowercase().starts_with(&lower)) {
            out.push(Suggestion {
                kind: SuggestionKind::Field,
                insert: format!("{name}: "),
                label: name,
                replace: replace.clone(),
            });
        }
        out.extend(provider_suggestions(&providers, word, replace.clone(), true));
    }
    out.push(Suggestion {
        kind: SuggestionKind::Hint,
        label: if word.is_empty() { "search text".to_string() } else { format!("search for \"{word}\"") },
        insert: if word.is_empty() { String::new() } else { quote_value(word) },
        replace,
    });
    out
}

/// Provider name of the innermost unclosed `:name(` before the cursor.
fn open_call<'a>(kinds: &[&'a TokenKind]) -> Option<&'a str> {
    let open = kinds.iter().rposition(|k| matches!(k, TokenKind::LParen))?;
    if kinds[open + 1..].iter().any(|k| !matches!(k, TokenKind::Ident(_) | TokenKind::Quoted(_) | TokenKind::Comma)) {
        return None;
    }
    match open.checked_sub(1).map(|i| kinds[i]) {
        Some(TokenKind::ColonIdent(name)) => Some(name),
        _ => None,
    }
}

fn provider_suggestions(
    providers: &[&ProviderSpec],
    word: &str,
    replace: Range<usize>,
    with_colon: bool,
) -> Vec<Suggestion> {
    let prefix = provider_alias(word);
    let mut aliases: Vec<String> = providers
        .iter()
        .map(|p| provider_alias(&p.name))
        .filter(|alias| alias.starts_with(&prefix))
        .collect();
    aliases.sort();
    aliases.dedup();
    aliases
        .into_iter()
        .map(|alias| Suggestion {
            kind: SuggestionKind::Provider,
            insert: if with_colon { format!(":{alias}(") } else { format!("{alias}(") },
            label: alias,
            replace: replace.clone(),
        })
        .collect()
}

fn value_suggestions(values: impl IntoIterator<Item = String>, word: &str, replace: Range<usize>) -> Vec<Suggestion> {
    let lower = word.to_lowercase();
    values
        .into_iter()
        .filter(|v| v.to_lowercase().starts_with(&lower))
        .take(MAX_VALUE_SUGGESTIONS)
        .map(|v| Suggestion { kind: SuggestionKind::Value, insert: quote_value(&v), label: v, replace: replace.clone() })
        .collect()
}

fn input_values(
    spec: &ProviderSpec,
    input: InputType,
    snapshot: &CatalogSnapshot,
) -> std::collections::BTreeSet<String> {
    match input {
        InputType::TableId => snapshot.artifacts().filter(|a| a.is_table()).map(|a| a.id.clone()).collect(),
        InputType::UserId => distinct_values(snapshot, resolve_field("owned_by")),
        InputType::Text => match spec.type_.as_str() {
            TYPE_CATEGORY => distinct_values(snapshot, FieldRef::Kind),
            BADGED_CATEGORY => distinct_values(snapshot, resolve_field("badged_by")),
            _ => distinct_values(snapshot, FieldRef::Name),
        },
    }
}
