//! Pretty printer. Output reparses and re-resolves to an alpha-equivalent
//! term with identical levels; levels are always printed explicitly and the
//! configured aliases are preferred over set literals.

use std::collections::BTreeSet;

use super::lexer::is_keyword;
use crate::kernel::{CoreDecl, LevelSpec};
use crate::lattice::{LatticeConfig, Level};
use crate::term::{self, Term, TermRef};

const PREC_TERM: u8 = 0;
const PREC_SPINE: u8 = 1;
const PREC_ATOM: u8 = 2;

/// Print a term; `names` are the binder hints of the enclosing context,
/// outermost first.
pub fn print_term(cfg: &LatticeConfig, names: &[String], t: &TermRef) -> String {
    let mut avoid = BTreeSet::new();
    term::global_refs(t, &mut avoid);
    let mut p = Printer {
        cfg,
        avoid,
        scope: names.to_vec(),
    };
    p.term(t, PREC_TERM)
}

pub fn print_decl(cfg: &LatticeConfig, d: &CoreDecl) -> String {
    match d {
        CoreDecl::Def {
            name,
            level,
            ty,
            body,
            ..
        } => {
            let lvl = match level {
                LevelSpec::At(l) => format!("^{}", cfg.render_level(l)),
                LevelSpec::Infer => String::new(),
            };
            format!(
                "def {name} :{lvl} {} := {}",
                print_term(cfg, &[], ty),
                print_term(cfg, &[], body)
            )
        }
        CoreDecl::Postulate {
            name, level, ty, ..
        } => {
            let lvl = match level {
                LevelSpec::At(l) => format!("^{}", cfg.render_level(l)),
                LevelSpec::Infer => String::new(),
            };
            format!("postulate {name} :{lvl} {}", print_term(cfg, &[], ty))
        }
        CoreDecl::Assert { name, bound, .. } => {
            format!("assert_level {name} <= {}", cfg.render_level(bound))
        }
    }
}

pub fn print_module(cfg: &LatticeConfig, decls: &[CoreDecl]) -> String {
    let mut out = String::new();
    for d in decls {
        out.push_str(&print_decl(cfg, d));
        out.push('\n');
    }
    out
}

struct Printer<'a> {
    cfg: &'a LatticeConfig,
    avoid: BTreeSet<String>,
    scope: Vec<String>,
}

impl Printer<'_> {
    fn level(&self, l: &Level) -> String {
        format!("^{}", self.cfg.render_level(l))
    }

    /// Pick a printable name for a binder: `_` when unused, otherwise the
    /// hint freshened against everything it could capture.
    fn fresh(&self, hint: &str, used: bool) -> String {
        if !used {
            return "_".to_owned();
        }
        let mut name = if hint.is_empty() || hint == "_" {
            "x".to_owned()
        } else {
            hint.to_owned()
        };
        while self.scope.contains(&name) || self.avoid.contains(&name) || is_keyword(&name) {
            name.push('\'');
        }
        name
    }

    fn var_name(&self, i: usize) -> String {
        if i < self.scope.len() {
            self.scope[self.scope.len() - 1 - i].clone()
        } else {
            format!("_free{}", i - self.scope.len())
        }
    }

    fn wrap(s: String, prec: u8, min: u8) -> String {
        if prec > min {
            format!("({s})")
        } else {
            s
        }
    }

    fn term(&mut self, t: &TermRef, prec: u8) -> String {
        match &**t {
            Term::Var(i) => self.var_name(*i),
            Term::Universe(i) => Self::wrap(format!("Type {i}"), prec, PREC_SPINE),
            Term::Global(name) => name.clone(),
            Term::Gated(id) => id.as_str().to_owned(),
            Term::Pi {
                hint,
                level,
                dom,
                cod,
            } => {
                let used = term::uses_var(cod, 0);
                let s = if used {
                    let dom_s = self.term(dom, PREC_TERM);
                    let name = self.fresh(hint, true);
                    self.scope.push(name.clone());
                    let cod_s = self.term(cod, PREC_TERM);
                    self.scope.pop();
                    format!("({name} :{} {dom_s}) -> {cod_s}", self.level(level))
                } else {
                    let dom_s = self.term(dom, PREC_ATOM);
                    self.scope.push("_".to_owned());
                    let cod_s = self.term(cod, PREC_TERM);
                    self.scope.pop();
                    format!("{dom_s}{} -> {cod_s}", self.level(level))
                };
                Self::wrap(s, prec, PREC_TERM)
            }
            Term::Lambda { .. } => {
                let mut binders = Vec::new();
                let mut cur = t.clone();
                let mut pushed = 0;
                while let Term::Lambda { hint, level, body } = &*cur.clone() {
                    let name = self.fresh(hint, term::uses_var(body, 0));
                    self.scope.push(name.clone());
                    pushed += 1;
                    binders.push(format!("{name}{}", self.level(level)));
                    cur = body.clone();
                }
                let body_s = self.term(&cur, PREC_TERM);
                for _ in 0..pushed {
                    self.scope.pop();
                }
                Self::wrap(
                    format!("fun {} => {body_s}", binders.join(" ")),
                    prec,
                    PREC_TERM,
                )
            }
            Term::App { fun, level, arg } => {
                let s = format!(
                    "{} {}{}",
                    self.term(fun, PREC_SPINE),
                    self.term(arg, PREC_ATOM),
                    self.level(level)
                );
                Self::wrap(s, prec, PREC_SPINE)
            }
            Term::Eq {
                observer,
                ty,
                lhs,
                rhs,
            } => {
                let s = format!(
                    "Eq{} {} {} {}",
                    self.level(observer),
                    self.term(ty, PREC_ATOM),
                    self.term(lhs, PREC_ATOM),
                    self.term(rhs, PREC_ATOM)
                );
                Self::wrap(s, prec, PREC_SPINE)
            }
            Term::Refl => "refl".to_owned(),
            Term::J {
                observer,
                scrutinee,
                motive,
                base,
            } => {
                let s = format!(
                    "J{} {} {} {}",
                    self.level(observer),
                    self.term(scrutinee, PREC_ATOM),
                    self.term(motive, PREC_ATOM),
                    self.term(base, PREC_ATOM)
                );
                Self::wrap(s, prec, PREC_SPINE)
            }
            Term::Absurd { scrutinee, target } => {
                let s = format!(
                    "absurd {} {}",
                    self.term(scrutinee, PREC_ATOM),
                    self.term(target, PREC_ATOM)
                );
                Self::wrap(s, prec, PREC_SPINE)
            }
            Term::VoidTy => "Void".into(),
            Term::UnitTy => "Unit".into(),
            Term::BoolTy => "Bool".into(),
            Term::NatTy => "Nat".into(),
            Term::ListTy(a) => self.form(prec, "List", None, &[a]),
            Term::SigmaTy { fst_ty, snd_fam } => self.form(prec, "Sigma", None, &[fst_ty, snd_fam]),
            Term::SumTy { left, right } => self.form(prec, "Sum", None, &[left, right]),
            Term::Tt => "tt".into(),
            Term::True => "true".into(),
            Term::False => "false".into(),
            Term::Zero => "zero".into(),
            Term::Succ(n) => self.form(prec, "succ", None, &[n]),
            Term::Nil => "nil".into(),
            Term::Cons { head, tail } => self.form(prec, "cons", None, &[head, tail]),
            Term::Pair { fst, snd } => self.form(prec, "pair", None, &[fst, snd]),
            Term::Inl(v) => self.form(prec, "inl", None, &[v]),
            Term::Inr(v) => self.form(prec, "inr", None, &[v]),
            Term::UnitElim {
                level,
                motive,
                unit_case,
                scrutinee,
            } => self.form(
                prec,
                "unitElim",
                Some(level),
                &[motive, unit_case, scrutinee],
            ),
            Term::BoolElim {
                level,
                motive,
                true_case,
                false_case,
                scrutinee,
            } => self.form(
                prec,
                "boolElim",
                Some(level),
                &[motive, true_case, false_case, scrutinee],
            ),
            Term::NatElim {
                level,
                motive,
                zero_case,
                succ_case,
                scrutinee,
            } => self.form(
                prec,
                "natElim",
                Some(level),
                &[motive, zero_case, succ_case, scrutinee],
            ),
            Term::ListElim {
                level,
                elem_ty,
                motive,
                nil_case,
                cons_case,
                scrutinee,
            } => self.form(
                prec,
                "listElim",
                Some(level),
                &[elem_ty, motive, nil_case, cons_case, scrutinee],
            ),
            Term::SigmaElim {
                level,
                fst_ty,
                snd_fam,
                motive,
                pair_case,
                scrutinee,
            } => self.form(
                prec,
                "sigmaElim",
                Some(level),
                &[fst_ty, snd_fam, motive, pair_case, scrutinee],
            ),
            Term::SumElim {
                level,
                left,
                right,
                motive,
                inl_case,
                inr_case,
                scrutinee,
            } => self.form(
                prec,
                "sumElim",
                Some(level),
                &[left, right, motive, inl_case, inr_case, scrutinee],
            ),
        }
    }

    fn form(&mut self, prec: u8, kw: &str, level: Option<&Level>, args: &[&TermRef]) -> String {
        let mut s = kw.to_owned();
        if let Some(l) = level {
            s.push_str(&self.level(l));
        }
        for a in args {
            s.push(' ');
            s.push_str(&self.term(a, PREC_ATOM));
        }
        if args.is_empty() {
            s
        } else {
            Self::wrap(s, prec, PREC_SPINE)
        }
    }
}
