//! Core term syntax: locally nameless (de Bruijn indices) with dependency
//! levels at exactly the positions the judgements annotate — binders,
//! application arguments, equality types and eliminator scrutinees.
//!
//! Binder name hints are carried for printing only and are ignored by
//! [`alpha_eq`], substitution and conversion.

use std::rc::Rc;

use crate::lattice::{GatedId, Level};

pub type TermRef = Rc<Term>;

#[derive(Clone, Debug)]
pub enum Term {
    /// Bound variable, innermost binder is index 0.
    Var(usize),
    /// `Type i`; predicative, `Type i : Type (i+1)`.
    Universe(u32),
    /// Reference to a checked global declaration.
    Global(String),
    /// A gated constant (`K`, `em`, `funext_ax`, `ua_ax`).
    Gated(GatedId),

    Pi {
        hint: String,
        level: Level,
        dom: TermRef,
        cod: TermRef,
    },
    Lambda {
        hint: String,
        level: Level,
        body: TermRef,
    },
    App {
        fun: TermRef,
        level: Level,
        arg: TermRef,
    },

    /// Observer-indexed propositional equality `Eq^obs ty lhs rhs`.
    Eq {
        observer: Level,
        ty: TermRef,
        lhs: TermRef,
        rhs: TermRef,
    },
    Refl,
    /// Transport along an equality proof: given `scrutinee : Eq^obs A a b`,
    /// `motive : (x :^{} A) -> Type i` and `base : motive a`, produces
    /// `motive b`. Reduces on `refl`.
    J {
        observer: Level,
        scrutinee: TermRef,
        motive: TermRef,
        base: TermRef,
    },

    /// Falsehood elimination; the scrutinee may live at any level.
    Absurd {
        scrutinee: TermRef,
        target: TermRef,
    },

    VoidTy,
    UnitTy,
    BoolTy,
    NatTy,
    ListTy(TermRef),
    /// `Sigma A B` where `B : (x :^{} A) -> Type j`.
    SigmaTy {
        fst_ty: TermRef,
        snd_fam: TermRef,
    },
    SumTy {
        left: TermRef,
        right: TermRef,
    },

    Tt,
    True,
    False,
    Zero,
    Succ(TermRef),
    Nil,
    Cons {
        head: TermRef,
        tail: TermRef,
    },
    Pair {
        fst: TermRef,
        snd: TermRef,
    },
    Inl(TermRef),
    Inr(TermRef),

    UnitElim {
        level: Level,
        motive: TermRef,
        unit_case: TermRef,
        scrutinee: TermRef,
    },
    BoolElim {
        level: Level,
        motive: TermRef,
        true_case: TermRef,
        false_case: TermRef,
        scrutinee: TermRef,
    },
    NatElim {
        level: Level,
        motive: TermRef,
        zero_case: TermRef,
        succ_case: TermRef,
        scrutinee: TermRef,
    },
    ListElim {
        level: Level,
        elem_ty: TermRef,
        motive: TermRef,
        nil_case: TermRef,
        cons_case: TermRef,
        scrutinee: TermRef,
    },
    SigmaElim {
        level: Level,
        fst_ty: TermRef,
        snd_fam: TermRef,
        motive: TermRef,
        pair_case: TermRef,
        scrutinee: TermRef,
    },
    SumElim {
        level: Level,
        left: TermRef,
        right: TermRef,
        motive: TermRef,
        inl_case: TermRef,
        inr_case: TermRef,
        scrutinee: TermRef,
    },
}

impl Term {
    pub fn rc(self) -> TermRef {
        Rc::new(self)
    }
}

/// Children of a node paired with how many binders each child sits under.
fn children(t: &Term) -> Vec<(&TermRef, usize)> {
    use Term::*;
    match t {
        Var(_) | Universe(_) | Global(_) | Gated(_) | Refl | VoidTy | UnitTy | BoolTy | NatTy
        | Tt | True | False | Zero | Nil => vec![],
        Pi { dom, cod, .. } => vec![(dom, 0), (cod, 1)],
        Lambda { body, .. } => vec![(body, 1)],
        App { fun, arg, .. } => vec![(fun, 0), (arg, 0)],
        Eq { ty, lhs, rhs, .. } => vec![(ty, 0), (lhs, 0), (rhs, 0)],
        J {
            scrutinee,
            motive,
            base,
            ..
        } => vec![(scrutinee, 0), (motive, 0), (base, 0)],
        Absurd { scrutinee, target } => vec![(scrutinee, 0), (target, 0)],
        ListTy(a) => vec![(a, 0)],
        SigmaTy { fst_ty, snd_fam } => vec![(fst_ty, 0), (snd_fam, 0)],
        SumTy { left, right } => vec![(left, 0), (right, 0)],
        Succ(n) => vec![(n, 0)],
        Cons { head, tail } => vec![(head, 0), (tail, 0)],
        Pair { fst, snd } => vec![(fst, 0), (snd, 0)],
        Inl(a) => vec![(a, 0)],
        Inr(a) => vec![(a, 0)],
        UnitElim {
            motive,
            unit_case,
            scrutinee,
            ..
        } => {
            vec![(motive, 0), (unit_case, 0), (scrutinee, 0)]
        }
        BoolElim {
            motive,
            true_case,
            false_case,
            scrutinee,
            ..
        } => {
            vec![(motive, 0), (true_case, 0), (false_case, 0), (scrutinee, 0)]
        }
        NatElim {
            motive,
            zero_case,
            succ_case,
            scrutinee,
            ..
        } => {
            vec![(motive, 0), (zero_case, 0), (succ_case, 0), (scrutinee, 0)]
        }
        ListElim {
            elem_ty,
            motive,
            nil_case,
            cons_case,
            scrutinee,
            ..
        } => vec![
            (elem_ty, 0),
            (motive, 0),
            (nil_case, 0),
            (cons_case, 0),
            (scrutinee, 0),
        ],
        SigmaElim {
            fst_ty,
            snd_fam,
            motive,
            pair_case,
            scrutinee,
            ..
        } => vec![
            (fst_ty, 0),
            (snd_fam, 0),
            (motive, 0),
            (pair_case, 0),
            (scrutinee, 0),
        ],
        SumElim {
            left,
            right,
            motive,
            inl_case,
            inr_case,
            scrutinee,
            ..
        } => vec![
            (left, 0),
            (right, 0),
            (motive, 0),
            (inl_case, 0),
            (inr_case, 0),
            (scrutinee, 0),
        ],
    }
}

/// Rebuild a node from new children, in the order `children` yields them.
fn rebuild(t: &Term, new: Vec<TermRef>) -> Term {
    use Term::*;
    let mut it = new.into_iter();
    let mut n = || it.next().expect("child count");
    match t {
        Var(_) | Universe(_) | Global(_) | Gated(_) | Refl | VoidTy | UnitTy | BoolTy | NatTy
        | Tt | True | False | Zero | Nil => t.clone(),
        Pi { hint, level, .. } => Pi {
            hint: hint.clone(),
            level: level.clone(),
            dom: n(),
            cod: n(),
        },
        Lambda { hint, level, .. } => Lambda {
            hint: hint.clone(),
            level: level.clone(),
            body: n(),
        },
        App { level, .. } => App {
            fun: n(),
            level: level.clone(),
            arg: n(),
        },
        Eq { observer, .. } => Eq {
            observer: observer.clone(),
            ty: n(),
            lhs: n(),
            rhs: n(),
        },
        J { observer, .. } => J {
            observer: observer.clone(),
            scrutinee: n(),
            motive: n(),
            base: n(),
        },
        Absurd { .. } => Absurd {
            scrutinee: n(),
            target: n(),
        },
        ListTy(_) => ListTy(n()),
        SigmaTy { .. } => SigmaTy {
            fst_ty: n(),
            snd_fam: n(),
        },
        SumTy { .. } => SumTy {
            left: n(),
            right: n(),
        },
        Succ(_) => Succ(n()),
        Cons { .. } => Cons {
            head: n(),
            tail: n(),
        },
        Pair { .. } => Pair { fst: n(), snd: n() },
        Inl(_) => Inl(n()),
        Inr(_) => Inr(n()),
        UnitElim { level, .. } => UnitElim {
            level: level.clone(),
            motive: n(),
            unit_case: n(),
            scrutinee: n(),
        },
        BoolElim { level, .. } => BoolElim {
            level: level.clone(),
            motive: n(),
            true_case: n(),
            false_case: n(),
            scrutinee: n(),
        },
        NatElim { level, .. } => NatElim {
            level: level.clone(),
            motive: n(),
            zero_case: n(),
            succ_case: n(),
            scrutinee: n(),
        },
        ListElim { level, .. } => ListElim {
            level: level.clone(),
            elem_ty: n(),
            motive: n(),
            nil_case: n(),
            cons_case: n(),
            scrutinee: n(),
        },
        SigmaElim { level, .. } => SigmaElim {
            level: level.clone(),
            fst_ty: n(),
            snd_fam: n(),
            motive: n(),
            pair_case: n(),
            scrutinee: n(),
        },
        SumElim { level, .. } => SumElim {
            level: level.clone(),
            left: n(),
            right: n(),
            motive: n(),
            inl_case: n(),
            inr_case: n(),
            scrutinee: n(),
        },
    }
}

fn map_vars(t: &TermRef, depth: usize, f: &impl Fn(usize, usize) -> Term) -> TermRef {
    if let Term::Var(i) = **t {
        return f(i, depth).rc();
    }
    let kids = children(t);
    if kids.is_empty() {
        return t.clone();
    }
    let new: Vec<TermRef> = kids
        .into_iter()
        .map(|(c, b)| map_vars(c, depth + b, f))
        .collect();
    rebuild(t, new).rc()
}

/// Shift every free variable up by `by`.
pub fn shift(t: &TermRef, by: usize) -> TermRef {
    if by == 0 {
        return t.clone();
    }
    map_vars(t, 0, &|i, depth| {
        if i >= depth {
            Term::Var(i + by)
        } else {
            Term::Var(i)
        }
    })
}

/// Substitute `arg` for variable 0 of `body`, closing that binder.
pub fn subst_top(body: &TermRef, arg: &TermRef) -> TermRef {
    map_vars(body, 0, &|i, depth| {
        if i == depth {
            (*shift(arg, depth)).clone()
        } else if i > depth {
            Term::Var(i - 1)
        } else {
            Term::Var(i)
        }
    })
}

/// True if variable `target` (counted from the outside of `t`) occurs free.
pub fn uses_var(t: &TermRef, target: usize) -> bool {
    fn go(t: &Term, target: usize) -> bool {
        if let Term::Var(i) = t {
            return *i == target;
        }
        children(t).into_iter().any(|(c, b)| go(c, target + b))
    }
    go(t, target)
}

/// Collect the names of all referenced globals.
pub fn global_refs(t: &TermRef, out: &mut std::collections::BTreeSet<String>) {
    if let Term::Global(name) = &**t {
        out.insert(name.clone());
    }
    for (c, _) in children(t) {
        global_refs(c, out);
    }
}

/// Structural equality up to binder name hints. Because terms are nameless
/// this is exactly alpha-equivalence; all level annotations must agree.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    use Term::*;
    let head_eq = match (a, b) {
        (Var(i), Var(j)) => i == j,
        (Universe(i), Universe(j)) => i == j,
        (Global(x), Global(y)) => x == y,
        (Gated(x), Gated(y)) => x == y,
        (Pi { level: l0, .. }, Pi { level: l1, .. }) => l0 == l1,
        (Lambda { level: l0, .. }, Lambda { level: l1, .. }) => l0 == l1,
        (App { level: l0, .. }, App { level: l1, .. }) => l0 == l1,
        (Eq { observer: o0, .. }, Eq { observer: o1, .. }) => o0 == o1,
        (J { observer: o0, .. }, J { observer: o1, .. }) => o0 == o1,
        (Absurd { .. }, Absurd { .. }) => true,
        (VoidTy, VoidTy) | (UnitTy, UnitTy) | (BoolTy, BoolTy) | (NatTy, NatTy) => true,
        (ListTy(_), ListTy(_)) => true,
        (SigmaTy { .. }, SigmaTy { .. }) => true,
        (SumTy { .. }, SumTy { .. }) => true,
        (Refl, Refl) | (Tt, Tt) | (True, True) | (False, False) | (Zero, Zero) | (Nil, Nil) => true,
        (Succ(_), Succ(_))
        | (Cons { .. }, Cons { .. })
        | (Pair { .. }, Pair { .. })
        | (Inl(_), Inl(_))
        | (Inr(_), Inr(_)) => true,
        (UnitElim { level: l0, .. }, UnitElim { level: l1, .. }) => l0 == l1,
        (BoolElim { level: l0, .. }, BoolElim { level: l1, .. }) => l0 == l1,
        (NatElim { level: l0, .. }, NatElim { level: l1, .. }) => l0 == l1,
        (ListElim { level: l0, .. }, ListElim { level: l1, .. }) => l0 == l1,
        (SigmaElim { level: l0, .. }, SigmaElim { level: l1, .. }) => l0 == l1,
        (SumElim { level: l0, .. }, SumElim { level: l1, .. }) => l0 == l1,
        _ => false,
    };
    if !head_eq {
        return false;
    }
    let ca = children(a);
    let cb = children(b);
    debug_assert_eq!(ca.len(), cb.len());
    ca.iter()
        .zip(cb.iter())
        .all(|((x, _), (y, _))| alpha_eq(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Level;

    fn var(i: usize) -> TermRef {
        Term::Var(i).rc()
    }

    fn lam(body: TermRef) -> TermRef {
        Term::Lambda {
            hint: "x".into(),
            level: Level::bottom(),
            body,
        }
        .rc()
    }

    fn app(f: TermRef, a: TermRef) -> TermRef {
        Term::App {
            fun: f,
            level: Level::bottom(),
            arg: a,
        }
        .rc()
    }

    #[test]
    fn shift_skips_bound_variables() {
        let t = lam(app(var(0), var(1)));
        let shifted = shift(&t, 2);
        assert!(alpha_eq(&shifted, &lam(app(var(0), var(3)))));
    }

    #[test]
    fn subst_top_is_capture_avoiding() {
        // (fun x => x y)[y := z]  where y = Var 0 outside, z = Var 1 outside
        let body = lam(app(var(0), var(1)));
        let result = subst_top(&body, &var(1));
        assert!(alpha_eq(&result, &lam(app(var(0), var(2)))));
    }

    #[test]
    fn alpha_eq_ignores_hints_but_not_levels() {
        let a = Term::Lambda {
            hint: "x".into(),
            level: Level::bottom(),
            body: var(0),
        };
        let b = Term::Lambda {
            hint: "y".into(),
            level: Level::bottom(),
            body: var(0),
        };
        assert!(alpha_eq(&a, &b));
        let cfg = crate::lattice::LatticeConfig::default_config();
        let h = cfg.canonicalize(["h"]).unwrap();
        let c = Term::Lambda {
            hint: "x".into(),
            level: h,
            body: var(0),
        };
        assert!(!alpha_eq(&a, &c));
    }

    #[test]
    fn uses_var_sees_through_binders() {
        let t = lam(var(1));
        assert!(uses_var(&t, 0));
        assert!(!uses_var(&t, 1));
    }
}
