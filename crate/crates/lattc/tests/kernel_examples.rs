//! Judgement-level examples exercised straight through the kernel API,
//! plus the structural properties (weakening, substitution stability).

use lattc::kernel::{self, Context, GlobalEnv, TypeError};
use lattc::lattice::{LatticeConfig, Level};
use lattc::pipeline::{self, DEFAULT_FUEL};
use lattc::term::{self, Term, TermRef};

fn cfg() -> LatticeConfig {
    LatticeConfig::default_config()
}

fn lv(c: &LatticeConfig, names: &[&str]) -> Level {
    c.canonicalize(names.iter().copied()).unwrap()
}

fn check_src(c: &LatticeConfig, src: &str) -> Result<GlobalEnv, pipeline::PipelineError> {
    let mut env = GlobalEnv::new();
    pipeline::check_source(c, &mut env, src, DEFAULT_FUEL, false)?;
    Ok(env)
}

fn lam(hint: &str, level: Level, body: TermRef) -> TermRef {
    Term::Lambda {
        hint: hint.into(),
        level,
        body,
    }
    .rc()
}

fn pi(hint: &str, level: Level, dom: TermRef, cod: TermRef) -> TermRef {
    Term::Pi {
        hint: hint.into(),
        level,
        dom,
        cod,
    }
    .rc()
}

fn v(i: usize) -> TermRef {
    Term::Var(i).rc()
}

#[test]
fn constant_function_checks_at_low_and_leaks_at_high() {
    let c = cfg();
    let h = lv(&c, &["h"]);
    let env = GlobalEnv::new();
    // ctx [A :^H Type 0]
    let mut ctx = Context::new();
    ctx.push("A", h.clone(), Term::Universe(0).rc());
    let ty = pi("x", Level::bottom(), v(0), pi("y", h.clone(), v(1), v(2)));
    let good = lam("x", Level::bottom(), lam("y", h.clone(), v(1)));
    kernel::check_term(
        &env,
        &c,
        &mut ctx,
        &Level::bottom(),
        &good,
        &ty,
        DEFAULT_FUEL,
    )
    .unwrap();
    // Returning the high argument is a variable-level violation.
    let bad = lam("x", Level::bottom(), lam("y", h.clone(), v(0)));
    let err = kernel::check_term(
        &env,
        &c,
        &mut ctx,
        &Level::bottom(),
        &bad,
        &ty,
        DEFAULT_FUEL,
    )
    .unwrap_err();
    assert!(matches!(err, TypeError::VarLevel { .. }), "{err}");
    // At observer H the leaking body is fine by subsumption of the variable.
    kernel::check_term(&env, &c, &mut ctx, &h, &bad, &ty, DEFAULT_FUEL).unwrap();
}

#[test]
fn identity_over_indistinguishable_indices_checks_at_low() {
    let c = cfg();
    let src = r#"
postulate P :^H (n :^S Nat) -> Type 0
postulate n0 :^S Nat
def pid :^L (p :^L P n0^S) -> P (succ n0)^S := fun p^L => p
"#;
    check_src(&c, src).unwrap();
    // The same definition does not check at S, where the indices are
    // distinguishable.
    let src_high = r#"
postulate P :^H (n :^S Nat) -> Type 0
postulate n0 :^S Nat
def pid :^S (p :^S P n0^S) -> P (succ n0)^S := fun p^S => p
"#;
    let err = check_src(&c, src_high).unwrap_err();
    assert_eq!(err.variant_name(), "ConversionError");
}

#[test]
fn absurd_accepts_a_scrutinee_at_any_level() {
    let c = cfg();
    let src = r#"
postulate contra :^H Void
def anything : Nat := absurd contra Nat
assert_level anything <= {}
"#;
    let env = check_src(&c, src).unwrap();
    assert_eq!(env.get("anything").unwrap().level, Level::bottom());
    // Even a classical contradiction is fine inside the dead branch, and
    // still does not raise the definition's own level.
    let src_cl = r#"
postulate noBool :^{cl} (b :^{} Bool) -> Void
def anything : Nat := absurd (noBool true) Nat
assert_level anything <= {}
"#;
    let env = check_src(&c, src_cl).unwrap();
    let report = &env.get("anything").unwrap().report;
    assert_eq!(env.get("anything").unwrap().level, Level::bottom());
    assert!(report.term_uses.contains("noBool"));
}

#[test]
fn absurd_scrutinee_mixing_incompatible_extensions_has_no_level() {
    let c = cfg();
    let src = r#"
postulate needsUip :^{uip} Nat
postulate needsUa :^{ua} (n :^{} Nat) -> (m :^{} Nat) -> Void
def broken : Nat := absurd (needsUa needsUip zero) Nat
"#;
    let err = check_src(&c, src).unwrap_err();
    assert_eq!(err.variant_name(), "LevelJoinError", "{err}");
}

#[test]
fn types_may_depend_on_higher_levels() {
    let c = cfg();
    let h = lv(&c, &["h"]);
    let env = GlobalEnv::new();
    let mut ctx = Context::new();
    ctx.push("A", h.clone(), Term::Universe(0).rc());
    // A^L -> A^H -> A is a well-formed type even though A is high.
    let ty = pi("x", Level::bottom(), v(0), pi("y", h, v(1), v(2)));
    let i = kernel::wf_type(&env, &c, &mut ctx, &ty, DEFAULT_FUEL).unwrap();
    assert_eq!(i, 0);
}

#[test]
fn global_references_behave_like_variables() {
    let c = cfg();
    // A classical definition cannot be used from a base-level body...
    let src = r#"
postulate picked :^{cl} Nat
def leak :^{} Nat := picked
"#;
    let err = check_src(&c, src).unwrap_err();
    assert_eq!(err.variant_name(), "VarLevelError");
    // ...but can be mentioned in a base-level type.
    let src_mention = r#"
postulate picked :^{cl} Nat
def stmt : Type 0 := Eq^{} Nat picked picked
assert_level stmt <= {}
"#;
    check_src(&c, src_mention).unwrap();
}

#[test]
fn duplicate_names_are_rejected() {
    let c = cfg();
    let src = "def a : Nat := zero\ndef a : Nat := zero";
    let err = check_src(&c, src).unwrap_err();
    assert_eq!(err.variant_name(), "ScopeError");
}

#[test]
fn j_annotation_must_match_the_equality_observer() {
    let c = cfg();
    let src = r#"
postulate e0 :^{} Eq^{uip} Nat zero zero
def bad : Nat := J^{} e0 (fun n^{} => Nat) zero
"#;
    let err = check_src(&c, src).unwrap_err();
    assert_eq!(err.variant_name(), "EqObserverError");
}

#[test]
fn weakening_preserves_judgements() {
    let c = cfg();
    let env = GlobalEnv::new();
    let nat = Term::NatTy.rc();
    let samples: Vec<(TermRef, TermRef)> = vec![
        (Term::Succ(v(0)).rc(), nat.clone()),
        (
            Term::BoolElim {
                level: Level::bottom(),
                motive: lam("_", Level::bottom(), nat.clone()),
                true_case: Term::Succ(v(0)).rc(),
                false_case: v(0),
                scrutinee: Term::True.rc(),
            }
            .rc(),
            nat.clone(),
        ),
    ];
    for (t, ty) in samples {
        let mut ctx = Context::new();
        ctx.push("n", Level::bottom(), nat.clone());
        kernel::check_term(&env, &c, &mut ctx, &Level::bottom(), &t, &ty, DEFAULT_FUEL).unwrap();
        // Insert an unused innermost entry at an arbitrary level.
        for extra in c.legal_levels() {
            let mut ctx2 = Context::new();
            ctx2.push("n", Level::bottom(), nat.clone());
            ctx2.push("unused", extra.clone(), Term::BoolTy.rc());
            let shifted = term::shift(&t, 1);
            kernel::check_term(
                &env,
                &c,
                &mut ctx2,
                &Level::bottom(),
                &shifted,
                &ty,
                DEFAULT_FUEL,
            )
            .unwrap_or_else(|e| panic!("weakening by {} failed: {e}", c.render_level(&extra)));
        }
    }
}

#[test]
fn redex_and_contractum_check_alike() {
    let c = cfg();
    // Bare lambdas only check against a known type, so the redexes that
    // actually arise go through defined globals.
    let env = check_src(&c, "def inc : (n :^{} Nat) -> Nat := fun n^{} => succ n").unwrap();
    let nat = Term::NatTy.rc();
    let body = Term::Succ(v(0)).rc();
    let redex = Term::App {
        fun: Term::Global("inc".into()).rc(),
        level: Level::bottom(),
        arg: Term::Zero.rc(),
    }
    .rc();
    let contractum = term::subst_top(&body, &Term::Zero.rc());
    for obs in c.legal_levels() {
        let mut ctx = Context::new();
        let a = kernel::check_term(&env, &c, &mut ctx, &obs, &redex, &nat, DEFAULT_FUEL).is_ok();
        let b =
            kernel::check_term(&env, &c, &mut ctx, &obs, &contractum, &nat, DEFAULT_FUEL).is_ok();
        assert_eq!(a, b);
        assert!(a);
        // An ill-typed pair fails on both sides.
        let bad_redex = Term::App {
            fun: Term::Global("inc".into()).rc(),
            level: Level::bottom(),
            arg: Term::True.rc(),
        }
        .rc();
        let bad_contractum = term::subst_top(&body, &Term::True.rc());
        let a =
            kernel::check_term(&env, &c, &mut ctx, &obs, &bad_redex, &nat, DEFAULT_FUEL).is_ok();
        let b = kernel::check_term(
            &env,
            &c,
            &mut ctx,
            &obs,
            &bad_contractum,
            &nat,
            DEFAULT_FUEL,
        )
        .is_ok();
        assert_eq!(a, b);
        assert!(!a);
    }
}

#[test]
fn eliminating_a_bool_at_its_own_level_is_fine() {
    let c = cfg();
    let h = lv(&c, &["h"]);
    let src = r#"
def flipHigh :^H (b :^H Bool) -> Bool :=
  fun b^H => boolElim^H (fun _^{} => Bool) false true b
"#;
    let env = check_src(&c, src).unwrap();
    assert_eq!(env.get("flipHigh").unwrap().level, h);
}

#[test]
fn observer_skipping_constants_convert_under_eq() {
    let c = cfg();
    // The two sides differ only in a high argument; refl works at L and is
    // rejected at H.
    let src_low = r#"
postulate A :^H Type 0
postulate f :^L (x :^L A) -> (y :^H A) -> A
postulate x0 :^L A
postulate y0 :^H A
postulate z0 :^H A
def fact : Eq^L A (f x0^L y0^H) (f x0^L z0^H) := refl
"#;
    check_src(&c, src_low).unwrap();
    let src_high = r#"
postulate A :^H Type 0
postulate f :^L (x :^L A) -> (y :^H A) -> A
postulate x0 :^L A
postulate y0 :^H A
postulate z0 :^H A
def fact : Eq^H A (f x0^L y0^H) (f x0^L z0^H) := refl
"#;
    let err = check_src(&c, src_high).unwrap_err();
    assert_eq!(err.variant_name(), "ConversionError");
}

#[test]
fn conversion_is_transitive_on_triples() {
    let c = cfg();
    let h = lv(&c, &["h"]);
    let env = check_src(&c, "def inc : (n :^{} Nat) -> Nat := fun n^{} => succ n").unwrap();
    // A reduction triple and an indistinguishability triple.
    let g = |name: &str| Term::Global(name.into()).rc();
    let appl = |f: TermRef, l: &Level, a: TermRef| {
        Term::App {
            fun: f,
            level: l.clone(),
            arg: a,
        }
        .rc()
    };
    let bot = Level::bottom();
    let red = [
        appl(g("inc"), &bot, appl(g("inc"), &bot, Term::Zero.rc())),
        Term::Succ(appl(g("inc"), &bot, Term::Zero.rc())).rc(),
        Term::Succ(Term::Succ(Term::Zero.rc()).rc()).rc(),
    ];
    // ctx: f :^L (x :^L Nat) -> (y :^H Nat) -> Nat; x, y, z, w : Nat at H.
    let f = v(4);
    let skip = [
        appl(appl(f.clone(), &bot, v(3)), &h, v(2)),
        appl(appl(f.clone(), &bot, v(3)), &h, v(1)),
        appl(appl(f, &bot, v(3)), &h, v(0)),
    ];
    for triple in [red, skip] {
        for obs in c.legal_levels() {
            let conv = |a: &TermRef, b: &TermRef| {
                let mut fuel = lattc::conversion::Fuel::new(DEFAULT_FUEL);
                let mode = lattc::conversion::ConvMode::Term(obs.clone());
                lattc::conversion::convert(&env, &mode, a, b, &mut fuel).unwrap()
            };
            let ab = conv(&triple[0], &triple[1]);
            let bc = conv(&triple[1], &triple[2]);
            let ac = conv(&triple[0], &triple[2]);
            if ab && bc {
                assert!(ac, "transitivity violated at {}", c.render_level(&obs));
            }
        }
    }
}

#[test]
fn lambda_binder_level_must_match_the_domain() {
    let c = cfg();
    let src = r#"
postulate A :^{} Type 0
def wrong : (x :^H A) -> A := fun x^{} => x
"#;
    let err = check_src(&c, src).unwrap_err();
    assert_eq!(err.variant_name(), "ConversionError");
}

#[test]
fn argument_annotations_must_match_the_domain() {
    let c = cfg();
    let src = r#"
postulate f :^{} (x :^H Nat) -> Nat
def wrong : Nat := f zero
"#;
    let err = check_src(&c, src).unwrap_err();
    assert_eq!(err.variant_name(), "ConversionError");
    let ok = r#"
postulate f :^{} (x :^H Nat) -> Nat
def fine : Nat := f zero^H
"#;
    check_src(&c, ok).unwrap();
}

#[test]
fn refl_on_distinct_constructors_is_a_conversion_error() {
    let c = cfg();
    let err = check_src(&c, "def bad : Eq^{} Bool true false := refl").unwrap_err();
    assert_eq!(err.variant_name(), "ConversionError");
}

#[test]
fn nested_absurd_scrutinees_keep_their_own_levels() {
    let c = cfg();
    let src = r#"
postulate contra :^{cl} Void
def anything : Nat := absurd (absurd contra Void) Nat
assert_level anything <= {}
"#;
    let env = check_src(&c, src).unwrap();
    let entry = env.get("anything").unwrap();
    assert_eq!(entry.level, Level::bottom());
    assert!(entry.report.term_uses.contains("contra"));
}
