//! Recursive-descent parser for the surface language.

use std::fmt;

use super::ast::*;
use super::lexer::{lex, Tok};

#[derive(Debug, Clone)]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
}

impl ParseError {
    pub(crate) fn here(span: Span, expected: &[&str], found: &str) -> ParseError {
        ParseError {
            span,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: found.to_string(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "expected {}, found {}",
            self.expected.join(" or "),
            self.found
        )
    }
}

impl std::error::Error for ParseError {}

pub fn parse_module(text: &str) -> Result<SurfaceModule, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, depth: 0 };
    let mut decls = Vec::new();
    while p.peek() != &Tok::Eof {
        decls.push(p.decl()?);
    }
    Ok(SurfaceModule { decls })
}

/// Parse a single term followed by end of input. Used by tests.
pub fn parse_term(text: &str) -> Result<STerm, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, depth: 0 };
    let t = p.term()?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(t)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    depth: usize,
}

/// Nesting bound; keeps crafted inputs from exhausting the stack.
const MAX_DEPTH: usize = 128;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn peek_span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> (Tok, Span) {
        let item = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        item
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError::here(
            self.peek_span(),
            expected,
            &self.peek().describe(),
        ))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Span, ParseError> {
        if self.peek() == &tok {
            Ok(self.next().1)
        } else {
            self.fail(&[what])
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        match self.peek() {
            Tok::Ident(_) => {
                let (tok, span) = self.next();
                match tok {
                    Tok::Ident(s) => Ok((s, span)),
                    _ => unreachable!(),
                }
            }
            _ => self.fail(&[what]),
        }
    }

    fn decl(&mut self) -> Result<SDecl, ParseError> {
        match self.peek() {
            Tok::KwDef => {
                let start = self.next().1;
                let (name, name_span) = self.ident("a definition name")?;
                self.expect(Tok::Colon, "`:`")?;
                let level = self.opt_level()?;
                let ty = self.term()?;
                self.expect(Tok::ColonEq, "`:=`")?;
                let body = self.term()?;
                let span = start.join(body.span);
                Ok(SDecl {
                    name,
                    name_span,
                    span,
                    kind: SDeclKind::Def { level, ty, body },
                })
            }
            Tok::KwPostulate => {
                let start = self.next().1;
                let (name, name_span) = self.ident("a postulate name")?;
                self.expect(Tok::Colon, "`:`")?;
                let level = self.opt_level()?;
                let ty = self.term()?;
                let span = start.join(ty.span);
                Ok(SDecl {
                    name,
                    name_span,
                    span,
                    kind: SDeclKind::Postulate { level, ty },
                })
            }
            Tok::KwAssertLevel => {
                let start = self.next().1;
                let (name, name_span) = self.ident("a declaration name")?;
                self.expect(Tok::Le, "`<=`")?;
                let bound = self.levelset()?;
                let span = start.join(bound.span);
                Ok(SDecl {
                    name,
                    name_span,
                    span,
                    kind: SDeclKind::Assert { bound },
                })
            }
            _ => self.fail(&["`def`", "`postulate`", "`assert_level`"]),
        }
    }

    fn opt_level(&mut self) -> Result<Option<LevelExpr>, ParseError> {
        if self.peek() == &Tok::Caret {
            self.next();
            Ok(Some(self.levelset()?))
        } else {
            Ok(None)
        }
    }

    fn level(&mut self) -> Result<LevelExpr, ParseError> {
        self.expect(Tok::Caret, "`^`")?;
        self.levelset()
    }

    fn levelset(&mut self) -> Result<LevelExpr, ParseError> {
        match self.peek() {
            Tok::LBrace => {
                let start = self.next().1;
                let mut names = Vec::new();
                if self.peek() != &Tok::RBrace {
                    loop {
                        let (name, _) = self.ident("an extension name")?;
                        names.push(name);
                        if self.peek() == &Tok::Comma {
                            self.next();
                        } else {
                            break;
                        }
                    }
                }
                let end = self.expect(Tok::RBrace, "`}`")?;
                Ok(LevelExpr {
                    kind: LevelExprKind::Set(names),
                    span: start.join(end),
                })
            }
            Tok::Ident(_) => {
                let (name, span) = self.ident("a level alias")?;
                Ok(LevelExpr {
                    kind: LevelExprKind::Alias(name),
                    span,
                })
            }
            _ => self.fail(&["`{`", "a level alias"]),
        }
    }

    fn term(&mut self) -> Result<STerm, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            self.depth -= 1;
            return self.fail(&["a less deeply nested term"]);
        }
        let out = self.term_inner();
        self.depth -= 1;
        out
    }

    fn term_inner(&mut self) -> Result<STerm, ParseError> {
        if self.peek() == &Tok::KwFun {
            let start = self.next().1;
            let mut binders = Vec::new();
            while matches!(self.peek(), Tok::Ident(_)) {
                let (name, span) = self.ident("a binder")?;
                let level = self.opt_level()?;
                binders.push(Binder { name, level, span });
            }
            if binders.is_empty() {
                return self.fail(&["a binder name"]);
            }
            self.expect(Tok::FatArrow, "`=>`")?;
            let body = self.term()?;
            let span = start.join(body.span);
            Ok(STerm {
                kind: STermKind::Fun {
                    binders,
                    body: Box::new(body),
                },
                span,
            })
        } else {
            self.arrow_term()
        }
    }

    fn arrow_term(&mut self) -> Result<STerm, ParseError> {
        // Dependent product: `(name : level? term) -> term`.
        if self.peek() == &Tok::LParen
            && matches!(self.peek_at(1), Tok::Ident(_))
            && self.peek_at(2) == &Tok::Colon
        {
            let start = self.next().1;
            let (name, _) = self.ident("a binder name")?;
            self.expect(Tok::Colon, "`:`")?;
            let level = self.opt_level()?;
            let dom = self.term()?;
            self.expect(Tok::RParen, "`)`")?;
            self.expect(Tok::Arrow, "`->`")?;
            let cod = self.term()?;
            let span = start.join(cod.span);
            return Ok(STerm {
                kind: STermKind::Pi {
                    name,
                    level,
                    dom: Box::new(dom),
                    cod: Box::new(cod),
                },
                span,
            });
        }
        let spine = self.spine()?;
        match self.peek() {
            // `dom^l -> cod`: a level after a complete spine annotates the
            // domain of a function type.
            Tok::Caret => {
                let level = self.level()?;
                self.expect(Tok::Arrow, "`->`")?;
                let cod = self.term()?;
                let span = spine.span.join(cod.span);
                Ok(STerm {
                    kind: STermKind::Arrow {
                        level: Some(level),
                        dom: Box::new(spine),
                        cod: Box::new(cod),
                    },
                    span,
                })
            }
            Tok::Arrow => {
                self.next();
                let cod = self.term()?;
                let span = spine.span.join(cod.span);
                Ok(STerm {
                    kind: STermKind::Arrow {
                        level: None,
                        dom: Box::new(spine),
                        cod: Box::new(cod),
                    },
                    span,
                })
            }
            _ => Ok(spine),
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::LParen
                | Tok::Ident(_)
                | Tok::KwType
                | Tok::KwEq
                | Tok::KwRefl
                | Tok::KwJ
                | Tok::KwAbsurd
                | Tok::Builtin(_)
        )
    }

    fn spine(&mut self) -> Result<STerm, ParseError> {
        let head = self.atom()?;
        let mut spine = head;
        while self.starts_atom() {
            let arg = self.atom()?;
            let level = if self.peek() == &Tok::Caret {
                self.next();
                Some(self.levelset()?)
            } else {
                None
            };
            let span = spine.span.join(arg.span);
            spine = STerm {
                kind: STermKind::App {
                    fun: Box::new(spine),
                    level,
                    arg: Box::new(arg),
                },
                span,
            };
        }
        Ok(spine)
    }

    fn atom(&mut self) -> Result<STerm, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                let start = self.next().1;
                let inner = self.term()?;
                let end = self.expect(Tok::RParen, "`)`")?;
                Ok(STerm {
                    kind: inner.kind,
                    span: start.join(end),
                })
            }
            Tok::KwType => {
                let start = self.next().1;
                if let Tok::Nat(n) = *self.peek() {
                    let (_, end) = self.next();
                    Ok(STerm {
                        kind: STermKind::Universe(n),
                        span: start.join(end),
                    })
                } else {
                    self.fail(&["a universe index"])
                }
            }
            Tok::Ident(_) => {
                let (name, span) = self.ident("a name")?;
                Ok(STerm {
                    kind: STermKind::Name(name),
                    span,
                })
            }
            Tok::KwRefl => {
                let (_, span) = self.next();
                Ok(STerm {
                    kind: STermKind::Refl,
                    span,
                })
            }
            Tok::KwEq => {
                let start = self.next().1;
                let level = self.level()?;
                let ty = self.atom()?;
                let lhs = self.atom()?;
                let rhs = self.atom()?;
                let span = start.join(rhs.span);
                Ok(STerm {
                    kind: STermKind::Eq {
                        level,
                        ty: Box::new(ty),
                        lhs: Box::new(lhs),
                        rhs: Box::new(rhs),
                    },
                    span,
                })
            }
            Tok::KwJ => {
                let start = self.next().1;
                let level = self.level()?;
                let scrutinee = self.atom()?;
                let motive = self.atom()?;
                let base = self.atom()?;
                let span = start.join(base.span);
                Ok(STerm {
                    kind: STermKind::J {
                        level,
                        scrutinee: Box::new(scrutinee),
                        motive: Box::new(motive),
                        base: Box::new(base),
                    },
                    span,
                })
            }
            Tok::KwAbsurd => {
                let start = self.next().1;
                let scrutinee = self.atom()?;
                let target = self.atom()?;
                let span = start.join(target.span);
                Ok(STerm {
                    kind: STermKind::Absurd {
                        scrutinee: Box::new(scrutinee),
                        target: Box::new(target),
                    },
                    span,
                })
            }
            Tok::Builtin(kw) => {
                let start = self.next().1;
                let level = if kw.takes_level() && self.peek() == &Tok::Caret {
                    self.next();
                    Some(self.levelset()?)
                } else {
                    None
                };
                let mut args = Vec::new();
                let mut span = start;
                for _ in 0..kw.arity() {
                    let arg = self.atom()?;
                    span = span.join(arg.span);
                    args.push(arg);
                }
                if let Some(l) = &level {
                    span = span.join(l.span);
                }
                Ok(STerm {
                    kind: STermKind::Builtin { kw, level, args },
                    span,
                })
            }
            _ => self.fail(&["a term"]),
        }
    }
}
