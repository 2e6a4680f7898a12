use std::fmt;
use std::ops::Range;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    /// `:name`, a provider call head.
    ColonIdent(String),
    Ident(String),
    Quoted(String),
    /// `:` directly after an identifier, separating field and value.
    Colon,
    LParen,
    RParen,
    Amp,
    Pipe,
    Bang,
    Comma,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::ColonIdent(s) => write!(f, ":{s}"),
            TokenKind::Ident(s) => write!(f, "{s}"),
            TokenKind::Quoted(s) => write!(f, "'{s}'"),
            TokenKind::Colon => f.write_str(":"),
            TokenKind::LParen => f.write_str("("),
            TokenKind::RParen => f.write_str(")"),
            TokenKind::Amp => f.write_str("&"),
            TokenKind::Pipe => f.write_str("|"),
            TokenKind::Bang => f.write_str("!"),
            TokenKind::Comma => f.write_str(","),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte range in the query text.
    pub span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message} at position {position}")]
pub struct LexError {
    pub position: usize,
    pub message: String,
}

pub fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '@' | '/')
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let mut tokens: Vec<Token> = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let single = match c {
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            '&' => Some(TokenKind::Amp),
            '|' => Some(TokenKind::Pipe),
            '!' => Some(TokenKind::Bang),
            ',' => Some(TokenKind::Comma),
            _ => None,
        };
        if let Some(kind) = single {
            chars.next();
            tokens.push(Token { kind, span: start..start + 1 });
            continue;
        }
        match c {
            ':' => {
                chars.next();
                let after_ident = matches!(
                    tokens.last(),
                    Some(Token { kind: TokenKind::Ident(_), span }) if span.end == start
                );
                let next_is_ident = chars.peek().is_some_and(|&(_, n)| is_ident_char(n));
                if !after_ident && next_is_ident {
                    let name = take_ident(&mut chars, text);
                    tokens.push(Token { span: start..start + 1 + name.len(), kind: TokenKind::ColonIdent(name) });
                } else {
                    tokens.push(Token { kind: TokenKind::Colon, span: start..start + 1 });
                }
            }
            '\'' | '"' => {
                chars.next();
                let mut value = String::new();
                let mut end = None;
                while let Some((i, ch)) = chars.next() {
                    match ch {
                        '\\' => match chars.next() {
                            Some((_, escaped)) => value.push(escaped),
                            None => break,
                        },
                        _ if ch == c => {
                            end = Some(i + 1);
                            break;
                        }
                        _ => value.push(ch),
                    }
                }
                let end = end.ok_or_else(|| LexError { position: start, message: "unterminated quote".into() })?;
                tokens.push(Token { kind: TokenKind::Quoted(value), span: start..end });
            }
            _ if is_ident_char(c) => {
                let name = take_ident(&mut chars, text);
                tokens.push(Token { span: start..start + name.len(), kind: TokenKind::Ident(name) });
            }
            _ => {
                return Err(LexError { position: start, message: format!("illegal character '{c}'") });
            }
        }
    }
    Ok(tokens)
}

fn take_ident(chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>, text: &str) -> String {
    let start = chars.peek().map_or(text.len(), |&(i, _)| i);
    let mut end = start;
    while let Some(&(i, c)) = chars.peek() {
        if !is_ident_char(c) {
            break;
        }
        end = i + c.len_utf8();
        chars.next();
    }
    text[start..end].to_string()
}
