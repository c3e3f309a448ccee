//! Name resolution: surface declarations to core declarations with de Bruijn
//! indices and canonical levels.

use std::fmt;

use thiserror::Error;

use super::ast::*;
use crate::kernel::{CoreDecl, GlobalEnv, LevelSpec};
use crate::lattice::{LatticeConfig, LatticeError, Level};
use crate::term::{Term, TermRef};

#[derive(Debug)]
pub struct ResolveError {
    pub span: Span,
    pub kind: ResolveErrorKind,
}

#[derive(Debug, Error)]
pub enum ResolveErrorKind {
    #[error("unknown identifier `{0}`")]
    Scope(String),
    #[error("{0}")]
    Lattice(#[from] LatticeError),
}

impl fmt::Display for ResolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)
    }
}

impl std::error::Error for ResolveError {}

impl ResolveError {
    pub fn variant_name(&self) -> &'static str {
        match &self.kind {
            ResolveErrorKind::Scope(_) => "ScopeError",
            ResolveErrorKind::Lattice(LatticeError::IllegalLevel { .. }) => "IllegalLevel",
            ResolveErrorKind::Lattice(LatticeError::UnknownExtension { .. }) => "UnknownExtension",
            ResolveErrorKind::Lattice(_) => "ConfigError",
        }
    }
}

/// Resolve a level expression to a canonical, legal level.
pub fn resolve_level(cfg: &LatticeConfig, le: &LevelExpr) -> Result<Level, ResolveError> {
    match &le.kind {
        LevelExprKind::Set(names) => {
            cfg.canonicalize(names.iter().map(|s| s.as_str()))
                .map_err(|e| ResolveError {
                    span: le.span,
                    kind: e.into(),
                })
        }
        LevelExprKind::Alias(name) => match cfg.alias(name) {
            Some(l) => Ok(l.clone()),
            None => Err(ResolveError {
                span: le.span,
                kind: LatticeError::UnknownExtension { name: name.clone() }.into(),
            }),
        },
    }
}

fn opt_level(cfg: &LatticeConfig, le: &Option<LevelExpr>) -> Result<Level, ResolveError> {
    match le {
        Some(le) => resolve_level(cfg, le),
        None => Ok(Level::bottom()),
    }
}

/// Resolve every declaration of a module against an environment; earlier
/// declarations of the same module are in scope for later ones.
pub fn resolve_module(
    m: &SurfaceModule,
    cfg: &LatticeConfig,
    env: &GlobalEnv,
) -> Result<Vec<CoreDecl>, ResolveError> {
    let mut known: Vec<String> = Vec::new();
    let mut out = Vec::new();
    for d in &m.decls {
        out.push(resolve_decl(d, cfg, env, &known)?);
        known.push(d.name.clone());
    }
    Ok(out)
}

/// Resolve a single declaration. `module_names` are the names of earlier
/// declarations in the same module.
pub fn resolve_decl(
    d: &SDecl,
    cfg: &LatticeConfig,
    env: &GlobalEnv,
    module_names: &[String],
) -> Result<CoreDecl, ResolveError> {
    let mut scope = Scope {
        cfg,
        env,
        module_names,
        locals: Vec::new(),
    };
    match &d.kind {
        SDeclKind::Def { level, ty, body } => Ok(CoreDecl::Def {
            name: d.name.clone(),
            level: match level {
                Some(le) => LevelSpec::At(resolve_level(cfg, le)?),
                None => LevelSpec::Infer,
            },
            ty: scope.term(ty)?,
            body: scope.term(body)?,
            span: d.span,
        }),
        SDeclKind::Postulate { level, ty } => Ok(CoreDecl::Postulate {
            name: d.name.clone(),
            level: match level {
                Some(le) => LevelSpec::At(resolve_level(cfg, le)?),
                None => LevelSpec::Infer,
            },
            ty: scope.term(ty)?,
            span: d.span,
        }),
        SDeclKind::Assert { bound } => Ok(CoreDecl::Assert {
            name: d.name.clone(),
            bound: resolve_level(cfg, bound)?,
            span: d.span,
        }),
    }
}

struct Scope<'a> {
    cfg: &'a LatticeConfig,
    env: &'a GlobalEnv,
    module_names: &'a [String],
    locals: Vec<String>,
}

impl Scope<'_> {
    fn level(&self, le: &Option<LevelExpr>) -> Result<Level, ResolveError> {
        opt_level(self.cfg, le)
    }

    fn term(&mut self, t: &STerm) -> Result<TermRef, ResolveError> {
        let span = t.span;
        Ok(match &t.kind {
            STermKind::Name(name) => {
                if let Some(i) = self.locals.iter().rev().position(|n| n == name) {
                    Term::Var(i).rc()
                } else if self.env.contains(name) || self.module_names.iter().any(|n| n == name) {
                    Term::Global(name.clone()).rc()
                } else {
                    return Err(ResolveError {
                        span,
                        kind: ResolveErrorKind::Scope(name.clone()),
                    });
                }
            }
            STermKind::Universe(i) => Term::Universe(*i).rc(),
            STermKind::Fun { binders, body } => {
                let mut levels = Vec::with_capacity(binders.len());
                for b in binders {
                    levels.push(self.level(&b.level)?);
                    self.locals.push(b.name.clone());
                }
                let body = self.term(body);
                for _ in binders {
                    self.locals.pop();
                }
                let mut out = body?;
                for (b, level) in binders.iter().zip(levels).rev() {
                    out = Term::Lambda {
                        hint: b.name.clone(),
                        level,
                        body: out,
                    }
                    .rc();
                }
                out
            }
            STermKind::Pi {
                name,
                level,
                dom,
                cod,
            } => {
                let level = self.level(level)?;
                let dom = self.term(dom)?;
                self.locals.push(name.clone());
                let cod = self.term(cod);
                self.locals.pop();
                Term::Pi {
                    hint: name.clone(),
                    level,
                    dom,
                    cod: cod?,
                }
                .rc()
            }
            STermKind::Arrow { level, dom, cod } => {
                let level = self.level(level)?;
                let dom = self.term(dom)?;
                self.locals.push("_".into());
                let cod = self.term(cod);
                self.locals.pop();
                Term::Pi {
                    hint: "_".into(),
                    level,
                    dom,
                    cod: cod?,
                }
                .rc()
            }
            STermKind::App { fun, level, arg } => Term::App {
                fun: self.term(fun)?,
                level: self.level(level)?,
                arg: self.term(arg)?,
            }
            .rc(),
            STermKind::Eq {
                level,
                ty,
                lhs,
                rhs,
            } => Term::Eq {
                observer: resolve_level(self.cfg, level)?,
                ty: self.term(ty)?,
                lhs: self.term(lhs)?,
                rhs: self.term(rhs)?,
            }
            .rc(),
            STermKind::Refl => Term::Refl.rc(),
            STermKind::J {
                level,
                scrutinee,
                motive,
                base,
            } => Term::J {
                observer: resolve_level(self.cfg, level)?,
                scrutinee: self.term(scrutinee)?,
                motive: self.term(motive)?,
                base: self.term(base)?,
            }
            .rc(),
            STermKind::Absurd { scrutinee, target } => Term::Absurd {
                scrutinee: self.term(scrutinee)?,
                target: self.term(target)?,
            }
            .rc(),
            STermKind::Builtin { kw, level, args } => {
                let level = self.level(level)?;
                let mut a: Vec<TermRef> = Vec::with_capacity(args.len());
                for arg in args {
                    a.push(self.term(arg)?);
                }
                builtin_term(*kw, level, a)
            }
        })
    }
}

fn builtin_term(kw: BuiltinKw, level: Level, mut a: Vec<TermRef>) -> TermRef {
    use BuiltinKw::*;
    let mut next = || a.remove(0);
    match kw {
        VoidTy => Term::VoidTy.rc(),
        UnitTy => Term::UnitTy.rc(),
        BoolTy => Term::BoolTy.rc(),
        NatTy => Term::NatTy.rc(),
        ListTy => Term::ListTy(next()).rc(),
        SigmaTy => Term::SigmaTy {
            fst_ty: next(),
            snd_fam: next(),
        }
        .rc(),
        SumTy => Term::SumTy {
            left: next(),
            right: next(),
        }
        .rc(),
        Tt => Term::Tt.rc(),
        True => Term::True.rc(),
        False => Term::False.rc(),
        Zero => Term::Zero.rc(),
        Succ => Term::Succ(next()).rc(),
        Nil => Term::Nil.rc(),
        Cons => Term::Cons {
            head: next(),
            tail: next(),
        }
        .rc(),
        Pair => Term::Pair {
            fst: next(),
            snd: next(),
        }
        .rc(),
        Inl => Term::Inl(next()).rc(),
        Inr => Term::Inr(next()).rc(),
        UnitElim => Term::UnitElim {
            level,
            motive: next(),
            unit_case: next(),
            scrutinee: next(),
        }
        .rc(),
        BoolElim => Term::BoolElim {
            level,
            motive: next(),
            true_case: next(),
            false_case: next(),
            scrutinee: next(),
        }
        .rc(),
        NatElim => Term::NatElim {
            level,
            motive: next(),
            zero_case: next(),
            succ_case: next(),
            scrutinee: next(),
        }
        .rc(),
        ListElim => Term::ListElim {
            level,
            elem_ty: next(),
            motive: next(),
            nil_case: next(),
            cons_case: next(),
            scrutinee: next(),
        }
        .rc(),
        SigmaElim => Term::SigmaElim {
            level,
            fst_ty: next(),
            snd_fam: next(),
            motive: next(),
            pair_case: next(),
            scrutinee: next(),
        }
        .rc(),
        SumElim => Term::SumElim {
            level,
            left: next(),
            right: next(),
            motive: next(),
            inl_case: next(),
            inr_case: next(),
            scrutinee: next(),
        }
        .rc(),
        K => Term::Gated(crate::lattice::GatedId::K).rc(),
        Em => Term::Gated(crate::lattice::GatedId::Em).rc(),
        FunextAx => Term::Gated(crate::lattice::GatedId::FunextAx).rc(),
        UaAx => Term::Gated(crate::lattice::GatedId::UaAx).rc(),
    }
}
