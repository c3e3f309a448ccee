//! Hand-rolled lexer. Line comments start with `--`.

use super::ast::{BuiltinKw, Span};
use super::parser::ParseError;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Tok {
    Ident(String),
    Nat(u32),
    KwDef,
    KwPostulate,
    KwAssertLevel,
    KwFun,
    KwType,
    KwEq,
    KwRefl,
    KwJ,
    KwAbsurd,
    Builtin(BuiltinKw),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    ColonEq,
    Arrow,
    FatArrow,
    Caret,
    Le,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Nat(n) => format!("number `{n}`"),
            Tok::KwDef => "`def`".into(),
            Tok::KwPostulate => "`postulate`".into(),
            Tok::KwAssertLevel => "`assert_level`".into(),
            Tok::KwFun => "`fun`".into(),
            Tok::KwType => "`Type`".into(),
            Tok::KwEq => "`Eq`".into(),
            Tok::KwRefl => "`refl`".into(),
            Tok::KwJ => "`J`".into(),
            Tok::KwAbsurd => "`absurd`".into(),
            Tok::Builtin(kw) => format!("`{}`", kw.name()),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::ColonEq => "`:=`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::FatArrow => "`=>`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

pub fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "def" | "postulate" | "assert_level" | "fun" | "Type" | "Eq" | "refl" | "J" | "absurd"
    ) || BuiltinKw::lookup(s).is_some()
}

fn keyword(s: &str) -> Option<Tok> {
    let t = match s {
        "def" => Tok::KwDef,
        "postulate" => Tok::KwPostulate,
        "assert_level" => Tok::KwAssertLevel,
        "fun" => Tok::KwFun,
        "Type" => Tok::KwType,
        "Eq" => Tok::KwEq,
        "refl" => Tok::KwRefl,
        "J" => Tok::KwJ,
        "absurd" => Tok::KwAbsurd,
        _ => Tok::Builtin(BuiltinKw::lookup(s)?),
    };
    Some(t)
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = text[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if c == '-' && text[i..].starts_with("--") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = match c {
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            '{' => {
                i += 1;
                Tok::LBrace
            }
            '}' => {
                i += 1;
                Tok::RBrace
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            '^' => {
                i += 1;
                Tok::Caret
            }
            ':' => {
                if text[i..].starts_with(":=") {
                    i += 2;
                    Tok::ColonEq
                } else {
                    i += 1;
                    Tok::Colon
                }
            }
            '-' => {
                if text[i..].starts_with("->") {
                    i += 2;
                    Tok::Arrow
                } else {
                    return Err(ParseError::here(Span::new(i, i + 1), &["`->`"], "`-`"));
                }
            }
            '=' => {
                if text[i..].starts_with("=>") {
                    i += 2;
                    Tok::FatArrow
                } else {
                    return Err(ParseError::here(Span::new(i, i + 1), &["`=>`"], "`=`"));
                }
            }
            '<' => {
                if text[i..].starts_with("<=") {
                    i += 2;
                    Tok::Le
                } else {
                    return Err(ParseError::here(Span::new(i, i + 1), &["`<=`"], "`<`"));
                }
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let n: u32 = text[i..j].parse().map_err(|_| {
                    ParseError::here(Span::new(i, j), &["a small number"], &text[i..j])
                })?;
                i = j;
                Tok::Nat(n)
            }
            c if is_ident_start(c) => {
                let mut j = i;
                while j < bytes.len() {
                    let c = text[j..].chars().next().unwrap();
                    if is_ident_continue(c) {
                        j += c.len_utf8();
                    } else {
                        break;
                    }
                }
                let word = &text[i..j];
                i = j;
                keyword(word).unwrap_or_else(|| Tok::Ident(word.to_owned()))
            }
            other => {
                return Err(ParseError::here(
                    Span::new(i, i + other.len_utf8()),
                    &["a token"],
                    &other.to_string(),
                ));
            }
        };
        out.push((tok, Span::new(start, i)));
    }
    out.push((Tok::Eof, Span::new(bytes.len(), bytes.len())));
    Ok(out)
}
