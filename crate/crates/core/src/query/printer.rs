use std::fmt::Write;

use super::lexer::is_ident_char;
use super::QueryAst;

/// Renders an AST in the textual query language. Operators are always
/// explicit and values that are not plain identifiers are quoted, so a
/// printed parser result parses back to the same tree.
pub fn print(ast: &QueryAst) -> String {
    let mut out = String::new();
    write_node(&mut out, ast, 0);
    out
}

const OR: u8 = 1;
const AND: u8 = 2;
const UNARY: u8 = 3;

fn precedence(ast: &QueryAst) -> u8 {
    match ast {
        QueryAst::Or(..) => OR,
        QueryAst::And(..) => AND,
        QueryAst::Not(_) => UNARY,
        _ => UNARY + 1,
    }
}

fn write_node(out: &mut String, ast: &QueryAst, min: u8) {
    if precedence(ast) < min {
        out.push('(');
        write_node(out, ast, 0);
        out.push(')');
        return;
    }
    match ast {
        QueryAst::Keyword(text) => write_value(out, text),
        QueryAst::FieldPill { field, value } => {
            out.push_str(field);
            out.push_str(": ");
            write_value(out, value);
        }
        QueryAst::ProviderCall { provider, args } => {
            let _ = write!(out, ":{provider}(");
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, arg);
            }
            out.push(')');
        }
        QueryAst::And(l, r) => {
            write_node(out, l, AND);
            out.push_str(" & ");
            write_node(out, r, AND + 1);
        }
        QueryAst::Or(l, r) => {
            write_node(out, l, OR);
            out.push_str(" | ");
            write_node(out, r, OR + 1);
        }
        QueryAst::Not(child) => {
            out.push('!');
            write_node(out, child, UNARY);
        }
        QueryAst::Group(child) => {
            out.push('(');
            write_node(out, child, 0);
            out.push(')');
        }
    }
}

/// Bare if the value lexes as one identifier, quoted otherwise.
pub fn write_value(out: &mut String, value: &str) {
    if !value.is_empty() && value.chars().all(is_ident_char) {
        out.push_str(value);
    } else {
        out.push('\'');
        for c in value.chars() {
            if c == '\'' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('\'');
    }
}

pub fn quote_value(value: &str) -> String {
    let mut out = String::new();
    write_value(&mut out, value);
    out
}
