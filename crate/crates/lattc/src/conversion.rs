//! Algorithmic, observer-indexed definitional equality: reduction to weak
//! head normal form plus level-aware structural comparison.
//!
//! The observer decides how much is compared. An application argument (or an
//! eliminator scrutinee) annotated strictly above the observer is skipped —
//! observers below the annotation cannot distinguish such arguments at all.
//! Otherwise arguments are compared at their annotation level. Lowering the
//! observer therefore only ever skips more, which is exactly the downgrade
//! property.
//!
//! Reduction rules: beta and iota are always on; global definitions unfold
//! (lazily during comparison, eagerly when a head form is demanded); the
//! computation rules of gated constants (`K` on `refl`) fire at *every*
//! observer — gating restricts term formation, never reduction. Type-mode
//! comparison (`ConvMode::TypeMode`) is the exception: it uses ungated
//! reduction and compares everything structurally.

use crate::kernel::GlobalEnv;
use crate::lattice::Level;
use crate::term::{self, Term, TermRef};

/// Reduction budget; decremented per head reduction step. Exhaustion is an
/// error, never a verdict.
#[derive(Debug, Clone)]
pub struct Fuel {
    remaining: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct FuelExhausted;

impl Fuel {
    pub fn new(steps: u64) -> Fuel {
        Fuel { remaining: steps }
    }

    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    fn step(&mut self) -> Result<(), FuelExhausted> {
        if self.remaining == 0 {
            return Err(FuelExhausted);
        }
        self.remaining -= 1;
        Ok(())
    }
}

/// Which rule families may fire during reduction. Beta and iota are always
/// on.
#[derive(Debug, Clone, Copy)]
pub struct RedFlags {
    /// Unfold global definitions with bodies.
    pub delta: bool,
    /// Computation rules of gated constants (`K A a P refl d ~> d`).
    pub gated: bool,
}

impl RedFlags {
    pub fn all() -> RedFlags {
        RedFlags {
            delta: true,
            gated: true,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ConvMode {
    /// Observer-indexed comparison with gated reduction.
    Term(Level),
    /// Full structural comparison with ungated reduction; used while
    /// establishing well-formedness of types.
    TypeMode,
}

pub enum ReflFailure {
    Fuel,
    /// The weak head normal forms of both sides, for error reporting.
    NotConvertible {
        lhs: TermRef,
        rhs: TermRef,
    },
}

/// Reduce to weak head normal form: the result's head is a binder, universe,
/// built-in constructor or type, gated constant, or neutral.
pub fn whnf(
    env: &GlobalEnv,
    t: &TermRef,
    flags: RedFlags,
    fuel: &mut Fuel,
) -> Result<TermRef, FuelExhausted> {
    let mut t = t.clone();
    loop {
        match &*t.clone() {
            Term::App { fun, level, arg } => {
                let f = whnf(env, fun, flags, fuel)?;
                if let Term::Lambda { body, .. } = &*f {
                    fuel.step()?;
                    t = term::subst_top(body, arg);
                    continue;
                }
                // K A a P p d ~> d when p reduces to refl.
                if flags.gated {
                    let (head, args) = spine(
                        &Term::App {
                            fun: f.clone(),
                            level: level.clone(),
                            arg: arg.clone(),
                        }
                        .rc(),
                    );
                    if matches!(&*head, Term::Gated(crate::lattice::GatedId::K)) && args.len() >= 5
                    {
                        let p = whnf(env, &args[3].1, flags, fuel)?;
                        if matches!(&*p, Term::Refl) {
                            fuel.step()?;
                            let mut reduct = args[4].1.clone();
                            for (lvl, extra) in &args[5..] {
                                reduct = Term::App {
                                    fun: reduct,
                                    level: lvl.clone(),
                                    arg: extra.clone(),
                                }
                                .rc();
                            }
                            t = reduct;
                            continue;
                        }
                    }
                }
                return Ok(Term::App {
                    fun: f,
                    level: level.clone(),
                    arg: arg.clone(),
                }
                .rc());
            }
            Term::Global(name) => {
                if flags.delta {
                    if let Some(body) = env.get(name).and_then(|e| e.body.as_ref()) {
                        fuel.step()?;
                        t = body.clone();
                        continue;
                    }
                }
                return Ok(t);
            }
            Term::J {
                observer,
                scrutinee,
                motive,
                base,
            } => {
                let s = whnf(env, scrutinee, flags, fuel)?;
                if matches!(&*s, Term::Refl) {
                    fuel.step()?;
                    t = base.clone();
                    continue;
                }
                return Ok(Term::J {
                    observer: observer.clone(),
                    scrutinee: s,
                    motive: motive.clone(),
                    base: base.clone(),
                }
                .rc());
            }
            Term::UnitElim {
                level,
                motive,
                unit_case,
                scrutinee,
            } => {
                let s = whnf(env, scrutinee, flags, fuel)?;
                if matches!(&*s, Term::Tt) {
                    fuel.step()?;
                    t = unit_case.clone();
                    continue;
                }
                return Ok(Term::UnitElim {
                    level: level.clone(),
                    motive: motive.clone(),
                    unit_case: unit_case.clone(),
                    scrutinee: s,
                }
                .rc());
            }
            Term::BoolElim {
                level,
                motive,
                true_case,
                false_case,
                scrutinee,
            } => {
                let s = whnf(env, scrutinee, flags, fuel)?;
                match &*s {
                    Term::True => {
                        fuel.step()?;
                        t = true_case.clone();
                        continue;
                    }
                    Term::False => {
                        fuel.step()?;
                        t = false_case.clone();
                        continue;
                    }
                    _ => {
                        return Ok(Term::BoolElim {
                            level: level.clone(),
                            motive: motive.clone(),
                            true_case: true_case.clone(),
                            false_case: false_case.clone(),
                            scrutinee: s,
                        }
                        .rc());
                    }
                }
            }
            Term::NatElim {
                level,
                motive,
                zero_case,
                succ_case,
                scrutinee,
            } => {
                let s = whnf(env, scrutinee, flags, fuel)?;
                match &*s {
                    Term::Zero => {
                        fuel.step()?;
                        t = zero_case.clone();
                        continue;
                    }
                    Term::Succ(n) => {
                        fuel.step()?;
                        let rec = Term::NatElim {
                            level: level.clone(),
                            motive: motive.clone(),
                            zero_case: zero_case.clone(),
                            succ_case: succ_case.clone(),
                            scrutinee: n.clone(),
                        }
                        .rc();
                        t = app0(&app0(succ_case, n), &rec);
                        continue;
                    }
                    _ => {
                        return Ok(Term::NatElim {
                            level: level.clone(),
                            motive: motive.clone(),
                            zero_case: zero_case.clone(),
                            succ_case: succ_case.clone(),
                            scrutinee: s,
                        }
                        .rc());
                    }
                }
            }
            Term::ListElim {
                level,
                elem_ty,
                motive,
                nil_case,
                cons_case,
                scrutinee,
            } => {
                let s = whnf(env, scrutinee, flags, fuel)?;
                match &*s {
                    Term::Nil => {
                        fuel.step()?;
                        t = nil_case.clone();
                        continue;
                    }
                    Term::Cons { head, tail } => {
                        fuel.step()?;
                        let rec = Term::ListElim {
                            level: level.clone(),
                            elem_ty: elem_ty.clone(),
                            motive: motive.clone(),
                            nil_case: nil_case.clone(),
                            cons_case: cons_case.clone(),
                            scrutinee: tail.clone(),
                        }
                        .rc();
                        t = app0(&app0(&app0(cons_case, head), tail), &rec);
                        continue;
                    }
                    _ => {
                        return Ok(Term::ListElim {
                            level: level.clone(),
                            elem_ty: elem_ty.clone(),
                            motive: motive.clone(),
                            nil_case: nil_case.clone(),
                            cons_case: cons_case.clone(),
                            scrutinee: s,
                        }
                        .rc());
                    }
                }
            }
            Term::SigmaElim {
                level,
                fst_ty,
                snd_fam,
                motive,
                pair_case,
                scrutinee,
            } => {
                let s = whnf(env, scrutinee, flags, fuel)?;
                match &*s {
                    Term::Pair { fst, snd } => {
                        fuel.step()?;
                        t = app0(&app0(pair_case, fst), snd);
                        continue;
                    }
                    _ => {
                        return Ok(Term::SigmaElim {
                            level: level.clone(),
                            fst_ty: fst_ty.clone(),
                            snd_fam: snd_fam.clone(),
                            motive: motive.clone(),
                            pair_case: pair_case.clone(),
                            scrutinee: s,
                        }
                        .rc());
                    }
                }
            }
            Term::SumElim {
                level,
                left,
                right,
                motive,
                inl_case,
                inr_case,
                scrutinee,
            } => {
                let s = whnf(env, scrutinee, flags, fuel)?;
                match &*s {
                    Term::Inl(v) => {
                        fuel.step()?;
                        t = app0(inl_case, v);
                        continue;
                    }
                    Term::Inr(v) => {
                        fuel.step()?;
                        t = app0(inr_case, v);
                        continue;
                    }
                    _ => {
                        return Ok(Term::SumElim {
                            level: level.clone(),
                            left: left.clone(),
                            right: right.clone(),
                            motive: motive.clone(),
                            inl_case: inl_case.clone(),
                            inr_case: inr_case.clone(),
                            scrutinee: s,
                        }
                        .rc());
                    }
                }
            }
            _ => return Ok(t),
        }
    }
}

fn app0(fun: &TermRef, arg: &TermRef) -> TermRef {
    Term::App {
        fun: fun.clone(),
        level: Level::bottom(),
        arg: arg.clone(),
    }
    .rc()
}

/// Decompose nested applications into head and arguments with their levels.
fn spine(t: &TermRef) -> (TermRef, Vec<(Level, TermRef)>) {
    let mut args = Vec::new();
    let mut cur = t.clone();
    while let Term::App { fun, level, arg } = &*cur.clone() {
        args.push((level.clone(), arg.clone()));
        cur = fun.clone();
    }
    args.reverse();
    (cur, args)
}

/// Observer-indexed convertibility. Both sides are assumed well-typed at
/// compatible types.
pub fn convert(
    env: &GlobalEnv,
    mode: &ConvMode,
    a: &TermRef,
    b: &TermRef,
    fuel: &mut Fuel,
) -> Result<bool, FuelExhausted> {
    let gated = matches!(mode, ConvMode::Term(_));
    let keep_globals = RedFlags {
        delta: false,
        gated,
    };
    // First compare without unfolding globals: spines with equal heads are
    // matched argument by argument under the skipping discipline, so high
    // arguments of the same definition never need its body.
    let x = whnf(env, a, keep_globals, fuel)?;
    let y = whnf(env, b, keep_globals, fuel)?;
    if structural(env, mode, &x, &y, fuel)? {
        return Ok(true);
    }
    // On mismatch, escalate to full delta reduction and retry once. This
    // also unblocks eliminators stuck on a global-headed scrutinee.
    let full = RedFlags { delta: true, gated };
    let x = whnf(env, &x, full, fuel)?;
    let y = whnf(env, &y, full, fuel)?;
    structural(env, mode, &x, &y, fuel)
}

/// The refl rule: both sides must be indistinguishable at the equality's own
/// observer level.
pub fn check_refl(
    env: &GlobalEnv,
    observer: &Level,
    lhs: &TermRef,
    rhs: &TermRef,
    fuel: &mut Fuel,
) -> Result<(), ReflFailure> {
    let mode = ConvMode::Term(observer.clone());
    match convert(env, &mode, lhs, rhs, fuel) {
        Ok(true) => Ok(()),
        Ok(false) => {
            let flags = RedFlags::all();
            let l = whnf(env, lhs, flags, fuel).unwrap_or_else(|_| lhs.clone());
            let r = whnf(env, rhs, flags, fuel).unwrap_or_else(|_| rhs.clone());
            Err(ReflFailure::NotConvertible { lhs: l, rhs: r })
        }
        Err(FuelExhausted) => Err(ReflFailure::Fuel),
    }
}

/// Skip an annotated position? Only a strictly lower observer skips;
/// incomparable observers compare.
fn skips(mode: &ConvMode, annotation: &Level) -> bool {
    match mode {
        ConvMode::Term(obs) => obs.lt(annotation),
        ConvMode::TypeMode => false,
    }
}

/// The mode at which an annotated position is compared when not skipped.
fn at(mode: &ConvMode, annotation: &Level) -> ConvMode {
    match mode {
        ConvMode::Term(_) => ConvMode::Term(annotation.clone()),
        ConvMode::TypeMode => ConvMode::TypeMode,
    }
}

fn conv(
    env: &GlobalEnv,
    mode: &ConvMode,
    a: &TermRef,
    b: &TermRef,
    fuel: &mut Fuel,
) -> Result<bool, FuelExhausted> {
    convert(env, mode, a, b, fuel)
}

/// Structural comparison of two weak head normal forms.
fn structural(
    env: &GlobalEnv,
    mode: &ConvMode,
    x: &TermRef,
    y: &TermRef,
    fuel: &mut Fuel,
) -> Result<bool, FuelExhausted> {
    use Term::*;
    match (&**x, &**y) {
        (Var(i), Var(j)) => Ok(i == j),
        (Universe(i), Universe(j)) => Ok(i == j),
        (Gated(g), Gated(h)) => Ok(g == h),
        (Global(n), Global(m)) => Ok(n == m),
        (
            Pi {
                level: l0,
                dom: d0,
                cod: c0,
                ..
            },
            Pi {
                level: l1,
                dom: d1,
                cod: c1,
                ..
            },
        ) => Ok(l0 == l1 && conv(env, mode, d0, d1, fuel)? && conv(env, mode, c0, c1, fuel)?),
        (
            Lambda {
                level: l0,
                body: b0,
                ..
            },
            Lambda {
                level: l1,
                body: b1,
                ..
            },
        ) => Ok(l0 == l1 && conv(env, mode, b0, b1, fuel)?),
        (App { .. }, App { .. }) => {
            let (h0, args0) = spine(x);
            let (h1, args1) = spine(y);
            if args0.len() != args1.len() {
                return Ok(false);
            }
            // Heads are neutral (var, postulate global, partial gated
            // constant); they must agree structurally.
            if !structural(env, mode, &h0, &h1, fuel)? {
                return Ok(false);
            }
            for ((l0, a0), (l1, a1)) in args0.iter().zip(args1.iter()) {
                if l0 != l1 {
                    return Ok(false);
                }
                if skips(mode, l0) {
                    continue;
                }
                if !conv(env, &at(mode, l0), a0, a1, fuel)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        (
            Eq {
                observer: o0,
                ty: t0,
                lhs: a0,
                rhs: b0,
            },
            Eq {
                observer: o1,
                ty: t1,
                lhs: a1,
                rhs: b1,
            },
        ) => {
            // The observer index is part of the type; sides are compared at
            // the equality's own observer.
            Ok(o0 == o1
                && conv(env, mode, t0, t1, fuel)?
                && conv(env, &at(mode, o0), a0, a1, fuel)?
                && conv(env, &at(mode, o0), b0, b1, fuel)?)
        }
        (Refl, Refl) => Ok(true),
        (
            J {
                observer: o0,
                scrutinee: s0,
                motive: m0,
                base: b0,
            },
            J {
                observer: o1,
                scrutinee: s1,
                motive: m1,
                base: b1,
            },
        ) => {
            if o0 != o1 || !conv(env, mode, m0, m1, fuel)? || !conv(env, mode, b0, b1, fuel)? {
                return Ok(false);
            }
            if skips(mode, o0) {
                return Ok(true);
            }
            conv(env, &at(mode, o0), s0, s1, fuel)
        }
        (
            Absurd {
                scrutinee: s0,
                target: t0,
            },
            Absurd {
                scrutinee: s1,
                target: t1,
            },
        ) => {
            // Proofs of Void carry no information; under an observer only
            // the target type is compared. Type-mode comparison stays fully
            // structural.
            match mode {
                ConvMode::Term(_) => conv(env, mode, t0, t1, fuel),
                ConvMode::TypeMode => {
                    Ok(conv(env, mode, t0, t1, fuel)? && conv(env, mode, s0, s1, fuel)?)
                }
            }
        }
        (VoidTy, VoidTy) | (UnitTy, UnitTy) | (BoolTy, BoolTy) | (NatTy, NatTy) => Ok(true),
        (ListTy(a0), ListTy(a1)) => conv(env, mode, a0, a1, fuel),
        (
            SigmaTy {
                fst_ty: f0,
                snd_fam: s0,
            },
            SigmaTy {
                fst_ty: f1,
                snd_fam: s1,
            },
        ) => Ok(conv(env, mode, f0, f1, fuel)? && conv(env, mode, s0, s1, fuel)?),
        (
            SumTy {
                left: l0,
                right: r0,
            },
            SumTy {
                left: l1,
                right: r1,
            },
        ) => Ok(conv(env, mode, l0, l1, fuel)? && conv(env, mode, r0, r1, fuel)?),
        (Tt, Tt) | (True, True) | (False, False) | (Zero, Zero) | (Nil, Nil) => Ok(true),
        (Succ(n0), Succ(n1)) => conv(env, mode, n0, n1, fuel),
        (Cons { head: h0, tail: t0 }, Cons { head: h1, tail: t1 }) => {
            Ok(conv(env, mode, h0, h1, fuel)? && conv(env, mode, t0, t1, fuel)?)
        }
        (Pair { fst: f0, snd: s0 }, Pair { fst: f1, snd: s1 }) => {
            Ok(conv(env, mode, f0, f1, fuel)? && conv(env, mode, s0, s1, fuel)?)
        }
        (Inl(v0), Inl(v1)) | (Inr(v0), Inr(v1)) => conv(env, mode, v0, v1, fuel),
        (
            UnitElim {
                level: l0,
                motive: m0,
                unit_case: u0,
                scrutinee: s0,
            },
            UnitElim {
                level: l1,
                motive: m1,
                unit_case: u1,
                scrutinee: s1,
            },
        ) => elim_conv(env, mode, fuel, l0, l1, &[(m0, m1), (u0, u1)], s0, s1),
        (
            BoolElim {
                level: l0,
                motive: m0,
                true_case: t0,
                false_case: f0,
                scrutinee: s0,
            },
            BoolElim {
                level: l1,
                motive: m1,
                true_case: t1,
                false_case: f1,
                scrutinee: s1,
            },
        ) => elim_conv(
            env,
            mode,
            fuel,
            l0,
            l1,
            &[(m0, m1), (t0, t1), (f0, f1)],
            s0,
            s1,
        ),
        (
            NatElim {
                level: l0,
                motive: m0,
                zero_case: z0,
                succ_case: c0,
                scrutinee: s0,
            },
            NatElim {
                level: l1,
                motive: m1,
                zero_case: z1,
                succ_case: c1,
                scrutinee: s1,
            },
        ) => elim_conv(
            env,
            mode,
            fuel,
            l0,
            l1,
            &[(m0, m1), (z0, z1), (c0, c1)],
            s0,
            s1,
        ),
        (
            ListElim {
                level: l0,
                elem_ty: e0,
                motive: m0,
                nil_case: n0,
                cons_case: c0,
                scrutinee: s0,
            },
            ListElim {
                level: l1,
                elem_ty: e1,
                motive: m1,
                nil_case: n1,
                cons_case: c1,
                scrutinee: s1,
            },
        ) => elim_conv(
            env,
            mode,
            fuel,
            l0,
            l1,
            &[(e0, e1), (m0, m1), (n0, n1), (c0, c1)],
            s0,
            s1,
        ),
        (
            SigmaElim {
                level: l0,
                fst_ty: f0,
                snd_fam: g0,
                motive: m0,
                pair_case: p0,
                scrutinee: s0,
            },
            SigmaElim {
                level: l1,
                fst_ty: f1,
                snd_fam: g1,
                motive: m1,
                pair_case: p1,
                scrutinee: s1,
            },
        ) => elim_conv(
            env,
            mode,
            fuel,
            l0,
            l1,
            &[(f0, f1), (g0, g1), (m0, m1), (p0, p1)],
            s0,
            s1,
        ),
        (
            SumElim {
                level: l0,
                left: a0,
                right: b0,
                motive: m0,
                inl_case: i0,
                inr_case: j0,
                scrutinee: s0,
            },
            SumElim {
                level: l1,
                left: a1,
                right: b1,
                motive: m1,
                inl_case: i1,
                inr_case: j1,
                scrutinee: s1,
            },
        ) => elim_conv(
            env,
            mode,
            fuel,
            l0,
            l1,
            &[(a0, a1), (b0, b1), (m0, m1), (i0, i1), (j0, j1)],
            s0,
            s1,
        ),
        _ => Ok(false),
    }
}

/// Shared comparison for stuck eliminators: annotation levels must agree,
/// motives and cases are compared at the ambient observer, and the scrutinee
/// follows the same skip-or-compare-at-annotation discipline as application
/// arguments.
#[allow(clippy::too_many_arguments)]
fn elim_conv(
    env: &GlobalEnv,
    mode: &ConvMode,
    fuel: &mut Fuel,
    l0: &Level,
    l1: &Level,
    components: &[(&TermRef, &TermRef)],
    s0: &TermRef,
    s1: &TermRef,
) -> Result<bool, FuelExhausted> {
    if l0 != l1 {
        return Ok(false);
    }
    for (a, b) in components {
        if !conv(env, mode, a, b, fuel)? {
            return Ok(false);
        }
    }
    if skips(mode, l0) {
        return Ok(true);
    }
    conv(env, &at(mode, l0), s0, s1, fuel)
}
