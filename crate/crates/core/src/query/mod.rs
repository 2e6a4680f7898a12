//! The textual search/filter language: keywords, `field: value` pills,
//! `:provider(args)` calls, `&`, `|`, `!` and parentheses.

mod eval;
mod fields;
mod lexer;
mod parser;
mod printer;
mod suggest;

use serde::Serialize;

pub use eval::{
    collect_calls, evaluate, evaluate_resolved, find_provider, resolve_calls, CallKey, CallOutcome, CallResults,
    EvalError, ResultSet,
};
pub use fields::{distinct_values, field_matches, field_names, resolve_field, FieldRef, FIELD_ALIASES};
pub use lexer::{is_ident_char, tokenize, LexError, Token, TokenKind};
pub use parser::{parse, ParseError};
pub use printer::{print, quote_value};
pub use suggest::{suggest, suggest_with, Suggestion, SuggestionKind, MAX_VALUE_SUGGESTIONS};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryAst {
    Keyword(String),
    FieldPill { field: String, value: String },
    /// `provider` is the name as written; it resolves by alias.
    ProviderCall { provider: String, args: Vec<String> },
    And(Box<QueryAst>, Box<QueryAst>),
    Or(Box<QueryAst>, Box<QueryAst>),
    Not(Box<QueryAst>),
    /// Parenthesized; transparent to evaluation.
    Group(Box<QueryAst>),
}

impl QueryAst {
    pub fn keyword(text: impl Into<String>) -> Self {
        QueryAst::Keyword(text.into())
    }

    pub fn pill(field: impl Into<String>, value: impl Into<String>) -> Self {
        QueryAst::FieldPill { field: field.into(), value: value.into() }
    }

    pub fn call(provider: impl Into<String>, args: &[&str]) -> Self {
        QueryAst::ProviderCall { provider: provider.into(), args: args.iter().map(|a| a.to_string()).collect() }
    }

    pub fn and(l: QueryAst, r: QueryAst) -> Self {
        QueryAst::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: QueryAst, r: QueryAst) -> Self {
        QueryAst::Or(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: QueryAst) -> Self {
        QueryAst::Not(Box::new(c))
    }

    pub fn group(c: QueryAst) -> Self {
        QueryAst::Group(Box::new(c))
    }

    /// True when no `!` occurs anywhere in the tree.
    pub fn is_negation_free(&self) -> bool {
        match self {
            QueryAst::Not(_) => false,
            QueryAst::And(l, r) | QueryAst::Or(l, r) => l.is_negation_free() && r.is_negation_free(),
            QueryAst::Group(c) => c.is_negation_free(),
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl QueryError {
    /// Byte offset of the offending input, for underlining.
    pub fn position(&self) -> usize {
        match self {
            QueryError::Lex(e) => e.position,
            QueryError::Parse(e) => e.position,
        }
    }
}

/// Tokenizes and parses a query. Blank input yields `None`, the query that
/// matches everything.
pub fn parse_query(text: &str) -> Result<Option<QueryAst>, QueryError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Ok(None);
    }
    Ok(Some(parse(&tokens)?))
}
