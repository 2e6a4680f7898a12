//! Recursive-descent parser.
//!
//! ```text
//! query   := or
//! or      := and ('|' and)*
//! and     := unary (('&' | <adjacent>) unary)*
//! unary   := '!' unary | primary
//! primary := '(' query ')' | call | pill | keyword
//! call    := COLON-IDENT ['(' [arg (',' arg)*] ')']
//! pill    := IDENT ':' (IDENT | QUOTED)
//! keyword := IDENT | QUOTED
//! ```

use super::lexer::{Token, TokenKind};
use super::QueryAst;

const TERM_START: &[&str] = &["keyword", "field: value", ":provider(...)", "(", "!"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at position {position}: expected {}", .expected.join(" or "))]
pub struct ParseError {
    pub position: usize,
    pub expected: Vec<&'static str>,
}

pub fn parse(tokens: &[Token]) -> Result<QueryAst, ParseError> {
    let mut parser = Parser { tokens, pos: 0 };
    let ast = parser.or()?;
    if parser.pos < tokens.len() {
        return Err(parser.error(&["&", "|", "end of query"]));
    }
    Ok(ast)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn position(&self) -> usize {
        match self.tokens.get(self.pos) {
            Some(t) => t.span.start,
            None => self.tokens.last().map_or(0, |t| t.span.end),
        }
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError { position: self.position(), expected: expected.to_vec() }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<QueryAst, ParseError> {
        let mut left = self.and()?;
        while self.eat(&TokenKind::Pipe) {
            let right = self.and()?;
            left = QueryAst::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<QueryAst, ParseError> {
        let mut left = self.unary()?;
        loop {
            let explicit = self.eat(&TokenKind::Amp);
            let starts_term = matches!(
                self.peek(),
                Some(
                    TokenKind::Bang
                        | TokenKind::LParen
                        | TokenKind::ColonIdent(_)
                        | TokenKind::Ident(_)
                        | TokenKind::Quoted(_)
                )
            );
            if !explicit && !starts_term {
                return Ok(left);
            }
            let right = self.unary()?;
            left = QueryAst::And(Box::new(left), Box::new(right));
        }
    }

    fn unary(&mut self) -> Result<QueryAst, ParseError> {
        if self.eat(&TokenKind::Bang) {
            return Ok(QueryAst::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<QueryAst, ParseError> {
        match self.peek().cloned() {
            Some(TokenKind::LParen) => {
                self.pos += 1;
                let inner = self.or()?;
                if !self.eat(&TokenKind::RParen) {
                    return Err(self.error(&[")"]));
                }
                Ok(QueryAst::Group(Box::new(inner)))
            }
            Some(TokenKind::ColonIdent(provider)) => {
                self.pos += 1;
                let mut args = Vec::new();
                if self.eat(&TokenKind::LParen) && !self.eat(&TokenKind::RParen) {
                    loop {
                        match self.peek().cloned() {
                            Some(TokenKind::Ident(a) | TokenKind::Quoted(a)) => {
                                self.pos += 1;
                                args.push(a);
                            }
                            _ => return Err(self.error(&["argument"])),
                        }
                        if self.eat(&TokenKind::RParen) {
                            break;
                        }
                        if !self.eat(&TokenKind::Comma) {
                            return Err(self.error(&[",", ")"]));
                        }
                    }
                }
                Ok(QueryAst::ProviderCall { provider, args })
            }
            Some(TokenKind::Ident(word)) => {
                self.pos += 1;
                if self.eat(&TokenKind::Colon) {
                    return match self.peek().cloned() {
                        Some(TokenKind::Ident(value) | TokenKind::Quoted(value)) => {
                            self.pos += 1;
                            Ok(QueryAst::FieldPill { field: word, value })
                        }
                        _ => Err(self.error(&["field value"])),
                    };
                }
                Ok(QueryAst::Keyword(word))
            }
            Some(TokenKind::Quoted(word)) => {
                if word.trim().is_empty() {
                    return Err(self.error(&["non-empty keyword"]));
                }
                self.pos += 1;
                Ok(QueryAst::Keyword(word))
            }
            _ => Err(self.error(TERM_START)),
        }
    }
}
