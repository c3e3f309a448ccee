//! Filling in omitted level annotations and level assertions.
//!
//! Omitted binder, argument and eliminator annotations default to the base
//! level `{}`; an omitted *declaration* level stays an inference marker and
//! is solved by the kernel's collect pass ([`infer_level`]).

use thiserror::Error;

use crate::kernel::{self, CoreDecl, GlobalEnv, TypeError};
use crate::lattice::{LatticeConfig, Level};
use crate::syntax::ast::*;

/// Default every omitted binder/argument/eliminator annotation to the base
/// level. Declaration levels are left as inference markers.
pub fn default_annotations(decl: &SDecl) -> SDecl {
    let mut out = decl.clone();
    match &mut out.kind {
        SDeclKind::Def { ty, body, .. } => {
            default_term(ty);
            default_term(body);
        }
        SDeclKind::Postulate { ty, .. } => default_term(ty),
        SDeclKind::Assert { .. } => {}
    }
    out
}

fn base(span: Span) -> Option<LevelExpr> {
    Some(LevelExpr::empty(span))
}

fn default_term(t: &mut STerm) {
    let span = t.span;
    match &mut t.kind {
        STermKind::Name(_) | STermKind::Universe(_) | STermKind::Refl => {}
        STermKind::Fun { binders, body } => {
            for b in binders.iter_mut() {
                if b.level.is_none() {
                    b.level = base(b.span);
                }
            }
            default_term(body);
        }
        STermKind::Pi {
            level, dom, cod, ..
        } => {
            if level.is_none() {
                *level = base(span);
            }
            default_term(dom);
            default_term(cod);
        }
        STermKind::Arrow { level, dom, cod } => {
            if level.is_none() {
                *level = base(span);
            }
            default_term(dom);
            default_term(cod);
        }
        STermKind::App { fun, level, arg } => {
            if level.is_none() {
                *level = base(span);
            }
            default_term(fun);
            default_term(arg);
        }
        STermKind::Eq { ty, lhs, rhs, .. } => {
            default_term(ty);
            default_term(lhs);
            default_term(rhs);
        }
        STermKind::J {
            scrutinee,
            motive,
            base,
            ..
        } => {
            default_term(scrutinee);
            default_term(motive);
            default_term(base);
        }
        STermKind::Absurd { scrutinee, target } => {
            default_term(scrutinee);
            default_term(target);
        }
        STermKind::Builtin { kw, level, args } => {
            if kw.takes_level() && level.is_none() {
                *level = base(span);
            }
            for a in args.iter_mut() {
                default_term(a);
            }
        }
    }
}

/// The least level at which a definition checks: the implication closure of
/// everything its body requires. Verified by re-running the checker at the
/// result.
pub fn infer_level(
    env: &GlobalEnv,
    cfg: &LatticeConfig,
    decl: &CoreDecl,
    fuel: u64,
) -> Result<Level, TypeError> {
    kernel::collect_requirements(env, cfg, decl, fuel)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AssertionVerdict {
    Holds,
    /// The extensions by which the declaration's level exceeds the bound.
    Fails {
        offending: Vec<String>,
    },
}

#[derive(Debug, Error)]
pub enum AssertionError {
    #[error("assert_level names unknown declaration `{name}`")]
    UnknownName { name: String },
}

/// `assert_level name <= bound` holds iff the checked level of `name` is
/// below the bound.
pub fn check_assertion(
    env: &GlobalEnv,
    name: &str,
    bound: &Level,
) -> Result<AssertionVerdict, AssertionError> {
    let entry = env.get(name).ok_or_else(|| AssertionError::UnknownName {
        name: name.to_owned(),
    })?;
    if entry.level.leq(bound) {
        Ok(AssertionVerdict::Holds)
    } else {
        let offending = entry
            .level
            .members()
            .iter()
            .filter(|m| !bound.members().contains(*m))
            .map(|m| m.as_str().to_owned())
            .collect();
        Ok(AssertionVerdict::Fails { offending })
    }
}
