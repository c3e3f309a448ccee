//! Bidirectional type checking of core terms at an observer level.
//!
//! Checking runs in one of three modes:
//!
//! * **term mode** at a concrete observer: variable access, gated constants,
//!   destructor levels and argument joins are all enforced;
//! * **type mode** (`wf_type` and everything reachable from a type): level
//!   obligations are recorded as *mentions* but never fail — a type may talk
//!   about any extension;
//! * **collect mode**: the observer is existential; every lower bound an
//!   access would impose is accumulated instead of enforced. Level inference
//!   and the any-level scrutinee of `absurd` are both built on it.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::conversion::{self, ConvMode, Fuel, RedFlags, ReflFailure};
use crate::lattice::{ExtensionId, GatedId, LatticeConfig, Level};
use crate::report::AssumptionReport;
use crate::syntax::ast::Span;
use crate::syntax::printer;
use crate::term::{self, Term, TermRef};

/// A resolved top-level declaration, ready for checking.
#[derive(Clone, Debug)]
pub enum CoreDecl {
    Def {
        name: String,
        level: LevelSpec,
        ty: TermRef,
        body: TermRef,
        span: Span,
    },
    Postulate {
        name: String,
        level: LevelSpec,
        ty: TermRef,
        span: Span,
    },
    Assert {
        name: String,
        bound: Level,
        span: Span,
    },
}

impl CoreDecl {
    pub fn name(&self) -> &str {
        match self {
            CoreDecl::Def { name, .. }
            | CoreDecl::Postulate { name, .. }
            | CoreDecl::Assert { name, .. } => name,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            CoreDecl::Def { span, .. }
            | CoreDecl::Postulate { span, .. }
            | CoreDecl::Assert { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug)]
pub enum LevelSpec {
    /// No annotation; the checker infers the least level.
    Infer,
    At(Level),
}

/// Append-only map of checked declarations.
#[derive(Clone, Debug, Default)]
pub struct GlobalEnv {
    entries: Vec<EnvEntry>,
    index: BTreeMap<String, usize>,
}

#[derive(Clone, Debug)]
pub struct EnvEntry {
    pub name: String,
    pub level: Level,
    pub ty: TermRef,
    /// Absent exactly for postulates.
    pub body: Option<TermRef>,
    pub report: AssumptionReport,
}

impl GlobalEnv {
    pub fn new() -> GlobalEnv {
        GlobalEnv::default()
    }

    pub fn get(&self, name: &str) -> Option<&EnvEntry> {
        self.index.get(name).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn entries(&self) -> &[EnvEntry] {
        &self.entries
    }

    fn insert(&mut self, entry: EnvEntry) {
        self.index.insert(entry.name.clone(), self.entries.len());
        self.entries.push(entry);
    }
}

/// Telescope of local bindings; innermost binder is de Bruijn index 0.
#[derive(Clone, Debug, Default)]
pub struct Context {
    entries: Vec<CtxEntry>,
}

#[derive(Clone, Debug)]
pub struct CtxEntry {
    pub hint: String,
    pub level: Level,
    pub ty: TermRef,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn push(&mut self, hint: &str, level: Level, ty: TermRef) {
        self.entries.push(CtxEntry {
            hint: hint.to_owned(),
            level,
            ty,
        });
    }

    pub fn pop(&mut self) {
        self.entries.pop();
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry for index `i` plus its type shifted to the current depth.
    pub fn lookup(&self, i: usize) -> Option<(&CtxEntry, TermRef)> {
        if i >= self.entries.len() {
            return None;
        }
        let entry = &self.entries[self.entries.len() - 1 - i];
        Some((entry, term::shift(&entry.ty, i + 1)))
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.hint.clone()).collect()
    }
}

#[derive(Debug, Error, Clone)]
pub enum TypeError {
    #[error("{name} at level ^{var_level} is not accessible at observer ^{observer}")]
    VarLevel {
        span: Span,
        name: String,
        var_level: String,
        observer: String,
    },
    #[error("`{construct}` (home ^{home}) may not be used at observer ^{observer}")]
    Gate {
        span: Span,
        construct: String,
        home: String,
        observer: String,
    },
    #[error("levels ^{left} and ^{right} have no join{detail}")]
    LevelJoin {
        span: Span,
        left: String,
        right: String,
        detail: String,
    },
    #[error("type mismatch: expected {expected}, found {found}")]
    Conversion {
        span: Span,
        expected: String,
        found: String,
    },
    #[error("{message}")]
    Universe { span: Span, message: String },
    #[error(
        "{eliminator} cannot destruct a term at level ^{scrutinee_level} at observer ^{observer}"
    )]
    DestructorLevel {
        span: Span,
        eliminator: &'static str,
        scrutinee_level: String,
        observer: String,
    },
    #[error("an equality observed at ^{eq_observer} cannot be eliminated at observer ^{observer}")]
    EqObserver {
        span: Span,
        observer: String,
        eq_observer: String,
    },
    #[error("reduction fuel exhausted; raise --fuel")]
    FuelExhausted { span: Span },
    #[error("{message}")]
    Scope { span: Span, message: String },
}

impl TypeError {
    pub fn span(&self) -> Span {
        match self {
            TypeError::VarLevel { span, .. }
            | TypeError::Gate { span, .. }
            | TypeError::LevelJoin { span, .. }
            | TypeError::Conversion { span, .. }
            | TypeError::Universe { span, .. }
            | TypeError::DestructorLevel { span, .. }
            | TypeError::EqObserver { span, .. }
            | TypeError::FuelExhausted { span, .. }
            | TypeError::Scope { span, .. } => *span,
        }
    }

    pub fn with_span(mut self, new: Span) -> TypeError {
        match &mut self {
            TypeError::VarLevel { span, .. }
            | TypeError::Gate { span, .. }
            | TypeError::LevelJoin { span, .. }
            | TypeError::Conversion { span, .. }
            | TypeError::Universe { span, .. }
            | TypeError::DestructorLevel { span, .. }
            | TypeError::EqObserver { span, .. }
            | TypeError::FuelExhausted { span, .. }
            | TypeError::Scope { span, .. } => *span = new,
        }
        self
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            TypeError::VarLevel { .. } => "VarLevelError",
            TypeError::Gate { .. } => "GateError",
            TypeError::LevelJoin { .. } => "LevelJoinError",
            TypeError::Conversion { .. } => "ConversionError",
            TypeError::Universe { .. } => "UniverseError",
            TypeError::DestructorLevel { .. } => "DestructorLevelError",
            TypeError::EqObserver { .. } => "EqObserverError",
            TypeError::FuelExhausted { .. } => "FuelExhausted",
            TypeError::Scope { .. } => "ScopeError",
        }
    }
}

/// Result of committing one declaration.
#[derive(Clone, Debug)]
pub struct DeclResult {
    pub name: String,
    pub level: Level,
    pub report: AssumptionReport,
}

/// Checking mode; see the module docs.
#[derive(Clone, Debug)]
enum Mode {
    Term(Level),
    Collect { discount: BTreeSet<ExtensionId> },
    Type,
}

/// Raw usage events; split into uses and mentions when the declaration is
/// committed.
#[derive(Default, Debug)]
struct Usage {
    term: BTreeSet<String>,
    typ: BTreeSet<String>,
}

pub struct Checker<'e> {
    env: &'e GlobalEnv,
    cfg: &'e LatticeConfig,
    fuel: Fuel,
    usage: Usage,
    collect_stack: Vec<BTreeSet<ExtensionId>>,
    span: Span,
}

/// Check a declaration, inferring its level when unannotated, and extend the
/// environment on success.
pub fn check_declaration(
    env: &mut GlobalEnv,
    cfg: &LatticeConfig,
    decl: &CoreDecl,
    fuel: u64,
) -> Result<DeclResult, TypeError> {
    let level = declared_or_inferred_level(env, cfg, decl, fuel)?;
    check_declaration_at(env, cfg, decl, level, fuel)
}

/// The level a declaration asks for, running inference when it is omitted.
pub fn declared_or_inferred_level(
    env: &GlobalEnv,
    cfg: &LatticeConfig,
    decl: &CoreDecl,
    fuel: u64,
) -> Result<Level, TypeError> {
    match decl {
        CoreDecl::Def {
            level: LevelSpec::At(l),
            ..
        }
        | CoreDecl::Postulate {
            level: LevelSpec::At(l),
            ..
        } => Ok(l.clone()),
        CoreDecl::Postulate {
            level: LevelSpec::Infer,
            ..
        } => Ok(Level::bottom()),
        CoreDecl::Def {
            level: LevelSpec::Infer,
            ..
        } => collect_requirements(env, cfg, decl, fuel),
        CoreDecl::Assert { .. } => Ok(Level::bottom()),
    }
}

/// Level inference: one pass in collect mode over the body gathers the least
/// extension set the definition needs (gated constants, referenced globals,
/// binder accesses, destructor annotations), closed under implication.
pub fn collect_requirements(
    env: &GlobalEnv,
    cfg: &LatticeConfig,
    decl: &CoreDecl,
    fuel: u64,
) -> Result<Level, TypeError> {
    let (ty, body, span) = match decl {
        CoreDecl::Def { ty, body, span, .. } => (ty, body, *span),
        _ => return Ok(Level::bottom()),
    };
    let mut checker = Checker::new(env, cfg, fuel, span);
    let mut ctx = Context::new();
    checker.wf_type(&mut ctx, ty)?;
    checker.collect_stack.push(BTreeSet::new());
    let mode = Mode::Collect {
        discount: BTreeSet::new(),
    };
    let result = checker.check(&mut ctx, &mode, body, ty);
    let raw = checker.collect_stack.pop().expect("collect stack");
    result?;
    checker.seal_requirements(raw)
}

/// Check a declaration at a given level and extend the environment.
pub fn check_declaration_at(
    env: &mut GlobalEnv,
    cfg: &LatticeConfig,
    decl: &CoreDecl,
    level: Level,
    fuel: u64,
) -> Result<DeclResult, TypeError> {
    let span = decl.span();
    if env.contains(decl.name()) {
        return Err(TypeError::Scope {
            span,
            message: format!("`{}` is already defined", decl.name()),
        });
    }
    match decl {
        CoreDecl::Def { name, ty, body, .. } => {
            let mut checker = Checker::new(env, cfg, fuel, span);
            let mut ctx = Context::new();
            checker.wf_type(&mut ctx, ty)?;
            checker.check(&mut ctx, &Mode::Term(level.clone()), body, ty)?;
            let report = checker.finish_report(level.clone());
            env.insert(EnvEntry {
                name: name.clone(),
                level: level.clone(),
                ty: ty.clone(),
                body: Some(body.clone()),
                report: report.clone(),
            });
            Ok(DeclResult {
                name: name.clone(),
                level,
                report,
            })
        }
        CoreDecl::Postulate { name, ty, .. } => {
            let mut checker = Checker::new(env, cfg, fuel, span);
            let mut ctx = Context::new();
            checker.wf_type(&mut ctx, ty)?;
            let report = checker.finish_report(level.clone());
            env.insert(EnvEntry {
                name: name.clone(),
                level: level.clone(),
                ty: ty.clone(),
                body: None,
                report: report.clone(),
            });
            Ok(DeclResult {
                name: name.clone(),
                level,
                report,
            })
        }
        CoreDecl::Assert { .. } => unreachable!("assertions are handled by elaborate"),
    }
}

/// Public entry: is `home(construct) <= obs`?
pub fn gate_check(cfg: &LatticeConfig, construct: GatedId, obs: &Level) -> Result<(), TypeError> {
    let span = Span::default();
    let home = cfg.home(construct).ok_or_else(|| TypeError::Gate {
        span,
        construct: construct.as_str().into(),
        home: "(none)".into(),
        observer: cfg.render_level(obs),
    })?;
    if home.leq(obs) {
        Ok(())
    } else {
        Err(TypeError::Gate {
            span,
            construct: construct.as_str().into(),
            home: cfg.render_level(home),
            observer: cfg.render_level(obs),
        })
    }
}

/// Infer the type of a term at a concrete observer. Exposed for tests and
/// tooling.
pub fn infer_type(
    env: &GlobalEnv,
    cfg: &LatticeConfig,
    ctx: &mut Context,
    obs: &Level,
    t: &TermRef,
    fuel: u64,
) -> Result<TermRef, TypeError> {
    let mut checker = Checker::new(env, cfg, fuel, Span::default());
    checker.infer(ctx, &Mode::Term(obs.clone()), t)
}

/// Check a term against a type at a concrete observer. Exposed for tests and
/// tooling.
pub fn check_term(
    env: &GlobalEnv,
    cfg: &LatticeConfig,
    ctx: &mut Context,
    obs: &Level,
    t: &TermRef,
    expected: &TermRef,
    fuel: u64,
) -> Result<(), TypeError> {
    let mut checker = Checker::new(env, cfg, fuel, Span::default());
    checker.check(ctx, &Mode::Term(obs.clone()), t, expected)
}

/// Well-formedness of a type (type mode), returning the universe index it
/// inhabits.
pub fn wf_type(
    env: &GlobalEnv,
    cfg: &LatticeConfig,
    ctx: &mut Context,
    t: &TermRef,
    fuel: u64,
) -> Result<u32, TypeError> {
    let mut checker = Checker::new(env, cfg, fuel, Span::default());
    checker.wf_type(ctx, t)
}

impl<'e> Checker<'e> {
    fn new(env: &'e GlobalEnv, cfg: &'e LatticeConfig, fuel: u64, span: Span) -> Checker<'e> {
        Checker {
            env,
            cfg,
            fuel: Fuel::new(fuel),
            usage: Usage::default(),
            collect_stack: Vec::new(),
            span,
        }
    }

    fn finish_report(&mut self, level: Level) -> AssumptionReport {
        let term_uses = std::mem::take(&mut self.usage.term);
        let mut type_mentions = std::mem::take(&mut self.usage.typ);
        type_mentions.retain(|m| !term_uses.contains(m));
        AssumptionReport {
            level,
            term_uses,
            type_mentions,
        }
    }

    fn seal_requirements(&self, raw: BTreeSet<ExtensionId>) -> Result<Level, TypeError> {
        self.cfg
            .canonicalize(raw.iter().map(|e| e.as_str()))
            .map_err(|e| {
                let raw_str = format!(
                    "{{{}}}",
                    raw.iter().map(|e| e.as_str()).collect::<Vec<_>>().join(",")
                );
                match e {
                    crate::lattice::LatticeError::IllegalLevel {
                        members,
                        first,
                        second,
                    } => TypeError::LevelJoin {
                        span: self.span,
                        left: format!("{{{first}}}"),
                        right: format!("{{{second}}}"),
                        detail: format!(
                            ": the term needs extensions {members} which are not jointly consistent"
                        ),
                    },
                    other => TypeError::LevelJoin {
                        span: self.span,
                        left: raw_str,
                        right: "{}".into(),
                        detail: format!(": {other}"),
                    },
                }
            })
    }

    fn rendered(&self, l: &Level) -> String {
        self.cfg.render_level(l)
    }

    fn print(&self, ctx: &Context, t: &TermRef) -> String {
        printer::print_term(self.cfg, &ctx.names(), t)
    }

    fn flags(&self, mode: &Mode) -> RedFlags {
        RedFlags {
            delta: true,
            gated: !matches!(mode, Mode::Type),
        }
    }

    fn whnf(&mut self, mode: &Mode, t: &TermRef) -> Result<TermRef, TypeError> {
        let flags = self.flags(mode);
        conversion::whnf(self.env, t, flags, &mut self.fuel)
            .map_err(|_| TypeError::FuelExhausted { span: self.span })
    }

    fn conv_mode(&self, mode: &Mode) -> ConvMode {
        match mode {
            Mode::Term(obs) => ConvMode::Term(obs.clone()),
            // The eventual observer is unknown; compare at the most
            // permissive one and let the verification pass decide.
            Mode::Collect { .. } => ConvMode::Term(Level::bottom()),
            Mode::Type => ConvMode::TypeMode,
        }
    }

    fn convertible(
        &mut self,
        mode: &Mode,
        got: &TermRef,
        expected: &TermRef,
    ) -> Result<bool, TypeError> {
        let cm = self.conv_mode(mode);
        conversion::convert(self.env, &cm, got, expected, &mut self.fuel)
            .map_err(|_| TypeError::FuelExhausted { span: self.span })
    }

    fn conversion_error(
        &mut self,
        ctx: &Context,
        mode: &Mode,
        got: &TermRef,
        expected: &TermRef,
    ) -> TypeError {
        let expected = self
            .whnf(mode, expected)
            .unwrap_or_else(|_| expected.clone());
        let found = self.whnf(mode, got).unwrap_or_else(|_| got.clone());
        TypeError::Conversion {
            span: self.span,
            expected: format!("`{}`", self.print(ctx, &expected)),
            found: format!("`{}`", self.print(ctx, &found)),
        }
    }

    /// Record or enforce a lower bound on the observer.
    fn require_access(
        &mut self,
        mode: &Mode,
        needed: &Level,
        err: impl FnOnce(&Self, &Level) -> TypeError,
    ) -> Result<(), TypeError> {
        match mode {
            Mode::Term(obs) => {
                if needed.leq(obs) {
                    Ok(())
                } else {
                    Err(err(self, obs))
                }
            }
            Mode::Collect { discount } => {
                let discount = discount.clone();
                let top = self.collect_stack.last_mut().expect("collect stack");
                for m in needed.members() {
                    if !discount.contains(m) {
                        top.insert(m.clone());
                    }
                }
                Ok(())
            }
            Mode::Type => Ok(()),
        }
    }

    /// Mode for checking an argument annotated `l0`: the observer may rely on
    /// the argument only to the extent the higher of the two levels allows.
    fn arg_mode(&self, mode: &Mode, l0: &Level) -> Result<Mode, TypeError> {
        match mode {
            Mode::Term(obs) => match self.cfg.join(obs, l0) {
                Some(joined) => Ok(Mode::Term(joined)),
                None => Err(TypeError::LevelJoin {
                    span: self.span,
                    left: self.rendered(obs),
                    right: self.rendered(l0),
                    detail: ": the argument annotation is not compatible with the observer".into(),
                }),
            },
            Mode::Collect { discount } => {
                let mut d = discount.clone();
                d.extend(l0.members().iter().cloned());
                Ok(Mode::Collect { discount: d })
            }
            Mode::Type => Ok(Mode::Type),
        }
    }

    fn note_gated(&mut self, mode: &Mode, id: GatedId) {
        match mode {
            Mode::Term(_) | Mode::Collect { .. } => {
                self.usage.term.insert(id.as_str().to_owned());
            }
            Mode::Type => {
                self.usage.typ.insert(id.as_str().to_owned());
            }
        }
    }

    fn note_global(&mut self, mode: &Mode, entry: &EnvEntry) {
        match mode {
            Mode::Term(_) | Mode::Collect { .. } => {
                if entry.body.is_none() {
                    self.usage.term.insert(entry.name.clone());
                }
                self.usage
                    .term
                    .extend(entry.report.term_uses.iter().cloned());
                self.usage
                    .typ
                    .extend(entry.report.type_mentions.iter().cloned());
            }
            Mode::Type => {
                if entry.body.is_none() {
                    self.usage.typ.insert(entry.name.clone());
                }
                self.usage
                    .typ
                    .extend(entry.report.term_uses.iter().cloned());
                self.usage
                    .typ
                    .extend(entry.report.type_mentions.iter().cloned());
            }
        }
    }

    /// Type mode: check that `t` is a type and return its universe index.
    fn wf_type(&mut self, ctx: &mut Context, t: &TermRef) -> Result<u32, TypeError> {
        let ty = self.infer(ctx, &Mode::Type, t)?;
        match &*self.whnf(&Mode::Type, &ty)? {
            Term::Universe(i) => Ok(*i),
            _ => Err(TypeError::Universe {
                span: self.span,
                message: format!("`{}` is not a type", self.print(ctx, t)),
            }),
        }
    }

    /// Check that `fam` is a family `(x :^{} dom_ty) -> Type j`; motives of
    /// eliminators and the second component of `Sigma` go through here.
    /// Bare functions are admitted by inferring their body under the binder.
    fn family_check(
        &mut self,
        ctx: &mut Context,
        fam: &TermRef,
        dom_ty: &TermRef,
    ) -> Result<u32, TypeError> {
        match &**fam {
            Term::Lambda { hint, level, body } => {
                if !level.is_empty() {
                    return Err(TypeError::Conversion {
                        span: self.span,
                        expected: format!(
                            "a family `(x :^{{}} {}) -> Type _`",
                            self.print(ctx, dom_ty)
                        ),
                        found: format!("a function binding at ^{}", self.rendered(level)),
                    });
                }
                ctx.push(hint, Level::bottom(), dom_ty.clone());
                let bty = self.infer(ctx, &Mode::Type, body);
                let bty = match bty {
                    Ok(bty) => self.whnf(&Mode::Type, &bty),
                    Err(e) => Err(e),
                };
                ctx.pop();
                match &*bty? {
                    Term::Universe(j) => Ok(*j),
                    _ => Err(TypeError::Universe {
                        span: self.span,
                        message: "a type family must produce a type".into(),
                    }),
                }
            }
            _ => {
                let fty = self.infer(ctx, &Mode::Type, fam)?;
                let fty = self.whnf(&Mode::Type, &fty)?;
                let Term::Pi {
                    level, dom, cod, ..
                } = &*fty
                else {
                    return Err(TypeError::Universe {
                        span: self.span,
                        message: format!("`{}` is not a type family", self.print(ctx, fam)),
                    });
                };
                if !level.is_empty() {
                    return Err(TypeError::Conversion {
                        span: self.span,
                        expected: "a family taking its argument at ^{}".into(),
                        found: format!("a family taking its argument at ^{}", self.rendered(level)),
                    });
                }
                if !self.convertible(&Mode::Type, dom, dom_ty)? {
                    return Err(self.conversion_error(ctx, &Mode::Type, dom, dom_ty));
                }
                match &*self.whnf(&Mode::Type, cod)? {
                    Term::Universe(j) => Ok(*j),
                    _ => Err(TypeError::Universe {
                        span: self.span,
                        message: "a type family must produce a type".into(),
                    }),
                }
            }
        }
    }

    fn destruct_check(
        &mut self,
        mode: &Mode,
        eliminator: &'static str,
        ls: &Level,
    ) -> Result<(), TypeError> {
        let span = self.span;
        let ls_str = self.rendered(ls);
        self.require_access(mode, ls, |s, obs| TypeError::DestructorLevel {
            span,
            eliminator,
            scrutinee_level: ls_str.clone(),
            observer: s.rendered(obs),
        })
    }

    /// The any-level scrutinee of `absurd`: find *some* level at which the
    /// scrutinee proves `Void` (the closure of its collected requirements),
    /// then verify the scrutinee at exactly that level.
    fn check_absurd_scrutinee(
        &mut self,
        ctx: &mut Context,
        mode: &Mode,
        scrutinee: &TermRef,
    ) -> Result<(), TypeError> {
        let void: TermRef = Term::VoidTy.rc();
        if matches!(mode, Mode::Type) {
            return self.check(ctx, &Mode::Type, scrutinee, &void);
        }
        self.collect_stack.push(BTreeSet::new());
        let pass1 = self.check(
            ctx,
            &Mode::Collect {
                discount: BTreeSet::new(),
            },
            scrutinee,
            &void,
        );
        let raw = self.collect_stack.pop().expect("collect stack");
        pass1?;
        let needed = self.seal_requirements(raw)?;
        self.check(ctx, &Mode::Term(needed), scrutinee, &void)
    }

    fn infer(&mut self, ctx: &mut Context, mode: &Mode, t: &TermRef) -> Result<TermRef, TypeError> {
        match &**t {
            Term::Var(i) => {
                let Some((entry, ty)) = ctx.lookup(*i) else {
                    return Err(TypeError::Scope {
                        span: self.span,
                        message: format!("unbound variable index {i}"),
                    });
                };
                let name = entry.hint.clone();
                let var_level = entry.level.clone();
                let span = self.span;
                let lv = self.rendered(&var_level);
                self.require_access(mode, &var_level, |s, obs| TypeError::VarLevel {
                    span,
                    name: format!("variable `{name}`"),
                    var_level: lv.clone(),
                    observer: s.rendered(obs),
                })?;
                Ok(ty)
            }
            Term::Universe(i) => Ok(Term::Universe(i + 1).rc()),
            Term::Global(name) => {
                let Some(entry) = self.env.get(name) else {
                    return Err(TypeError::Scope {
                        span: self.span,
                        message: format!("unknown global `{name}`"),
                    });
                };
                let needed = entry.level.clone();
                let ty = entry.ty.clone();
                let what = if entry.body.is_none() {
                    "postulate"
                } else {
                    "definition"
                };
                let entry = entry.clone();
                self.note_global(mode, &entry);
                let span = self.span;
                let lv = self.rendered(&needed);
                let name = name.clone();
                self.require_access(mode, &needed, |s, obs| TypeError::VarLevel {
                    span,
                    name: format!("{what} `{name}`"),
                    var_level: lv.clone(),
                    observer: s.rendered(obs),
                })?;
                Ok(ty)
            }
            Term::Gated(id) => {
                let id = *id;
                let Some(home) = self.cfg.home(id).cloned() else {
                    return Err(TypeError::Gate {
                        span: self.span,
                        construct: id.as_str().into(),
                        home: "(none)".into(),
                        observer: "(any)".into(),
                    });
                };
                self.note_gated(mode, id);
                let span = self.span;
                let hstr = self.rendered(&home);
                self.require_access(mode, &home, |s, obs| TypeError::Gate {
                    span,
                    construct: id.as_str().into(),
                    home: hstr.clone(),
                    observer: s.rendered(obs),
                })?;
                Ok(gated_type(id, &home))
            }
            Term::Pi {
                hint,
                level,
                dom,
                cod,
            } => {
                let i = self.wf_type(ctx, dom)?;
                ctx.push(hint, level.clone(), dom.clone());
                let j = self.wf_type(ctx, cod);
                ctx.pop();
                Ok(Term::Universe(i.max(j?)).rc())
            }
            Term::Lambda { .. } => Err(TypeError::Conversion {
                span: self.span,
                expected: "a function in a position with a known type".into(),
                found: format!(
                    "`{}` (bare functions cannot be inferred)",
                    self.print(ctx, t)
                ),
            }),
            Term::App { fun, level, arg } => {
                let fty = self.infer(ctx, mode, fun)?;
                let fty = self.whnf(mode, &fty)?;
                let Term::Pi {
                    level: l0,
                    dom,
                    cod,
                    ..
                } = &*fty
                else {
                    return Err(TypeError::Conversion {
                        span: self.span,
                        expected: "a function".into(),
                        found: format!(
                            "`{}` of type `{}`",
                            self.print(ctx, fun),
                            self.print(ctx, &fty)
                        ),
                    });
                };
                if level != l0 {
                    return Err(TypeError::Conversion {
                        span: self.span,
                        expected: format!("an argument annotated ^{}", self.rendered(l0)),
                        found: format!("an argument annotated ^{}", self.rendered(level)),
                    });
                }
                let amode = self.arg_mode(mode, l0)?;
                self.check(ctx, &amode, arg, dom)?;
                Ok(term::subst_top(cod, arg))
            }
            Term::Eq { ty, lhs, rhs, .. } => {
                let i = self.wf_type(ctx, ty)?;
                self.check(ctx, &Mode::Type, lhs, ty)?;
                self.check(ctx, &Mode::Type, rhs, ty)?;
                Ok(Term::Universe(i).rc())
            }
            Term::Refl => Err(TypeError::Conversion {
                span: self.span,
                expected: "refl in a position with a known equality type".into(),
                found: "`refl`".into(),
            }),
            Term::J {
                observer,
                scrutinee,
                motive,
                base,
            } => {
                let ety = self.infer(ctx, mode, scrutinee)?;
                let ety = self.whnf(mode, &ety)?;
                let Term::Eq {
                    observer: lo,
                    ty: a_ty,
                    lhs,
                    rhs,
                } = &*ety
                else {
                    return Err(TypeError::Conversion {
                        span: self.span,
                        expected: "an equality proof".into(),
                        found: format!(
                            "`{}` of type `{}`",
                            self.print(ctx, scrutinee),
                            self.print(ctx, &ety)
                        ),
                    });
                };
                if observer != lo {
                    return Err(TypeError::EqObserver {
                        span: self.span,
                        observer: self.rendered(observer),
                        eq_observer: self.rendered(lo),
                    });
                }
                if let Mode::Term(obs) = mode {
                    // Downgrading makes higher-observer equalities usable
                    // lower, never the reverse.
                    if !obs.leq(lo) {
                        return Err(TypeError::EqObserver {
                            span: self.span,
                            observer: self.rendered(obs),
                            eq_observer: self.rendered(lo),
                        });
                    }
                }
                let a_ty = a_ty.clone();
                let lhs = lhs.clone();
                let rhs = rhs.clone();
                self.family_check(ctx, motive, &a_ty)?;
                let base_ty = app_base(motive, &lhs);
                self.check(ctx, mode, base, &base_ty)?;
                Ok(app_base(motive, &rhs))
            }
            Term::Absurd { scrutinee, target } => {
                self.wf_type(ctx, target)?;
                self.check_absurd_scrutinee(ctx, mode, scrutinee)?;
                Ok(target.clone())
            }
            Term::VoidTy | Term::UnitTy | Term::BoolTy | Term::NatTy => Ok(Term::Universe(0).rc()),
            Term::ListTy(a) => {
                let i = self.wf_type(ctx, a)?;
                Ok(Term::Universe(i).rc())
            }
            Term::SigmaTy { fst_ty, snd_fam } => {
                let i = self.wf_type(ctx, fst_ty)?;
                let j = self.family_check(ctx, snd_fam, fst_ty)?;
                Ok(Term::Universe(i.max(j)).rc())
            }
            Term::SumTy { left, right } => {
                let i = self.wf_type(ctx, left)?;
                let j = self.wf_type(ctx, right)?;
                Ok(Term::Universe(i.max(j)).rc())
            }
            Term::Tt => Ok(Term::UnitTy.rc()),
            Term::True | Term::False => Ok(Term::BoolTy.rc()),
            Term::Zero => Ok(Term::NatTy.rc()),
            Term::Succ(n) => {
                self.check(ctx, mode, n, &Term::NatTy.rc())?;
                Ok(Term::NatTy.rc())
            }
            Term::Cons { head, tail } => {
                let elem = self.infer(ctx, mode, head)?;
                let list = Term::ListTy(elem).rc();
                self.check(ctx, mode, tail, &list)?;
                Ok(list)
            }
            Term::Nil | Term::Pair { .. } | Term::Inl(_) | Term::Inr(_) => {
                Err(TypeError::Conversion {
                    span: self.span,
                    expected: "a constructor in a position with a known type".into(),
                    found: format!("`{}`", self.print(ctx, t)),
                })
            }
            Term::UnitElim {
                level,
                motive,
                unit_case,
                scrutinee,
            } => {
                self.destruct_check(mode, "unitElim", level)?;
                self.family_check(ctx, motive, &Term::UnitTy.rc())?;
                self.check(ctx, mode, unit_case, &app_base(motive, &Term::Tt.rc()))?;
                self.check(ctx, mode, scrutinee, &Term::UnitTy.rc())?;
                Ok(app_base(motive, scrutinee))
            }
            Term::BoolElim {
                level,
                motive,
                true_case,
                false_case,
                scrutinee,
            } => {
                self.destruct_check(mode, "boolElim", level)?;
                self.family_check(ctx, motive, &Term::BoolTy.rc())?;
                self.check(ctx, mode, true_case, &app_base(motive, &Term::True.rc()))?;
                self.check(ctx, mode, false_case, &app_base(motive, &Term::False.rc()))?;
                self.check(ctx, mode, scrutinee, &Term::BoolTy.rc())?;
                Ok(app_base(motive, scrutinee))
            }
            Term::NatElim {
                level,
                motive,
                zero_case,
                succ_case,
                scrutinee,
            } => {
                self.destruct_check(mode, "natElim", level)?;
                self.family_check(ctx, motive, &Term::NatTy.rc())?;
                self.check(ctx, mode, zero_case, &app_base(motive, &Term::Zero.rc()))?;
                // (k :^{} Nat) -> (ih :^{} P k) -> P (succ k)
                let succ_ty = pi(
                    "k",
                    Term::NatTy.rc(),
                    pi(
                        "ih",
                        app_base(&term::shift(motive, 1), &Term::Var(0).rc()),
                        app_base(&term::shift(motive, 2), &Term::Succ(Term::Var(1).rc()).rc()),
                    ),
                );
                self.check(ctx, mode, succ_case, &succ_ty)?;
                self.check(ctx, mode, scrutinee, &Term::NatTy.rc())?;
                Ok(app_base(motive, scrutinee))
            }
            Term::ListElim {
                level,
                elem_ty,
                motive,
                nil_case,
                cons_case,
                scrutinee,
            } => {
                self.destruct_check(mode, "listElim", level)?;
                self.wf_type(ctx, elem_ty)?;
                let list_ty = Term::ListTy(elem_ty.clone()).rc();
                self.family_check(ctx, motive, &list_ty)?;
                self.check(ctx, mode, nil_case, &app_base(motive, &Term::Nil.rc()))?;
                // (x :^{} A) -> (xs :^{} List A) -> (ih :^{} P xs) -> P (cons x xs)
                let cons_ty = pi(
                    "x",
                    elem_ty.clone(),
                    pi(
                        "xs",
                        Term::ListTy(term::shift(elem_ty, 1)).rc(),
                        pi(
                            "ih",
                            app_base(&term::shift(motive, 2), &Term::Var(0).rc()),
                            app_base(
                                &term::shift(motive, 3),
                                &Term::Cons {
                                    head: Term::Var(2).rc(),
                                    tail: Term::Var(1).rc(),
                                }
                                .rc(),
                            ),
                        ),
                    ),
                );
                self.check(ctx, mode, cons_case, &cons_ty)?;
                self.check(ctx, mode, scrutinee, &list_ty)?;
                Ok(app_base(motive, scrutinee))
            }
            Term::SigmaElim {
                level,
                fst_ty,
                snd_fam,
                motive,
                pair_case,
                scrutinee,
            } => {
                self.destruct_check(mode, "sigmaElim", level)?;
                self.wf_type(ctx, fst_ty)?;
                self.family_check(ctx, snd_fam, fst_ty)?;
                let sig_ty = Term::SigmaTy {
                    fst_ty: fst_ty.clone(),
                    snd_fam: snd_fam.clone(),
                }
                .rc();
                self.family_check(ctx, motive, &sig_ty)?;
                // (a :^{} A) -> (b :^{} B a) -> P (pair a b)
                let pair_ty = pi(
                    "a",
                    fst_ty.clone(),
                    pi(
                        "b",
                        app_base(&term::shift(snd_fam, 1), &Term::Var(0).rc()),
                        app_base(
                            &term::shift(motive, 2),
                            &Term::Pair {
                                fst: Term::Var(1).rc(),
                                snd: Term::Var(0).rc(),
                            }
                            .rc(),
                        ),
                    ),
                );
                self.check(ctx, mode, pair_case, &pair_ty)?;
                self.check(ctx, mode, scrutinee, &sig_ty)?;
                Ok(app_base(motive, scrutinee))
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
                self.destruct_check(mode, "sumElim", level)?;
                self.wf_type(ctx, left)?;
                self.wf_type(ctx, right)?;
                let sum_ty = Term::SumTy {
                    left: left.clone(),
                    right: right.clone(),
                }
                .rc();
                self.family_check(ctx, motive, &sum_ty)?;
                let inl_ty = pi(
                    "a",
                    left.clone(),
                    app_base(&term::shift(motive, 1), &Term::Inl(Term::Var(0).rc()).rc()),
                );
                let inr_ty = pi(
                    "b",
                    right.clone(),
                    app_base(&term::shift(motive, 1), &Term::Inr(Term::Var(0).rc()).rc()),
                );
                self.check(ctx, mode, inl_case, &inl_ty)?;
                self.check(ctx, mode, inr_case, &inr_ty)?;
                self.check(ctx, mode, scrutinee, &sum_ty)?;
                Ok(app_base(motive, scrutinee))
            }
        }
    }

    fn check(
        &mut self,
        ctx: &mut Context,
        mode: &Mode,
        t: &TermRef,
        expected: &TermRef,
    ) -> Result<(), TypeError> {
        match &**t {
            Term::Lambda { hint, level, body } => {
                let exp = self.whnf(mode, expected)?;
                let Term::Pi {
                    level: l0,
                    dom,
                    cod,
                    ..
                } = &*exp
                else {
                    return Err(TypeError::Conversion {
                        span: self.span,
                        expected: format!("`{}`", self.print(ctx, &exp)),
                        found: format!("the function `{}`", self.print(ctx, t)),
                    });
                };
                if level != l0 {
                    return Err(TypeError::Conversion {
                        span: self.span,
                        expected: format!("a binder annotated ^{}", self.rendered(l0)),
                        found: format!(
                            "`{}` binding at ^{}",
                            self.print(ctx, t),
                            self.rendered(level)
                        ),
                    });
                }
                ctx.push(hint, l0.clone(), dom.clone());
                let result = self.check(ctx, mode, body, cod);
                ctx.pop();
                result
            }
            Term::Pair { fst, snd } => {
                let exp = self.whnf(mode, expected)?;
                let Term::SigmaTy { fst_ty, snd_fam } = &*exp else {
                    return Err(self.mismatch(ctx, t, &exp));
                };
                self.check(ctx, mode, fst, fst_ty)?;
                self.check(ctx, mode, snd, &app_base(snd_fam, fst))
            }
            Term::Inl(v) => {
                let exp = self.whnf(mode, expected)?;
                let Term::SumTy { left, .. } = &*exp else {
                    return Err(self.mismatch(ctx, t, &exp));
                };
                self.check(ctx, mode, v, left)
            }
            Term::Inr(v) => {
                let exp = self.whnf(mode, expected)?;
                let Term::SumTy { right, .. } = &*exp else {
                    return Err(self.mismatch(ctx, t, &exp));
                };
                self.check(ctx, mode, v, right)
            }
            Term::Nil => {
                let exp = self.whnf(mode, expected)?;
                match &*exp {
                    Term::ListTy(_) => Ok(()),
                    _ => Err(self.mismatch(ctx, t, &exp)),
                }
            }
            Term::Cons { head, tail } => {
                let exp = self.whnf(mode, expected)?;
                let Term::ListTy(elem) = &*exp else {
                    return Err(self.mismatch(ctx, t, &exp));
                };
                self.check(ctx, mode, head, elem)?;
                self.check(ctx, mode, tail, &exp)
            }
            Term::Refl => {
                let exp = self.whnf(mode, expected)?;
                let Term::Eq {
                    observer: lo,
                    lhs,
                    rhs,
                    ..
                } = &*exp
                else {
                    return Err(self.mismatch(ctx, t, &exp));
                };
                match conversion::check_refl(self.env, lo, lhs, rhs, &mut self.fuel) {
                    Ok(()) => Ok(()),
                    Err(ReflFailure::Fuel) => Err(TypeError::FuelExhausted { span: self.span }),
                    Err(ReflFailure::NotConvertible { lhs, rhs }) => Err(TypeError::Conversion {
                        span: self.span,
                        expected: format!(
                            "refl needs both sides indistinguishable at ^{}; left is `{}`",
                            self.rendered(lo),
                            self.print(ctx, &lhs)
                        ),
                        found: format!("right is `{}`", self.print(ctx, &rhs)),
                    }),
                }
            }
            Term::Universe(i) => {
                let exp = self.whnf(mode, expected)?;
                match &*exp {
                    Term::Universe(j) if *j == i + 1 => Ok(()),
                    Term::Universe(j) => Err(TypeError::Universe {
                        span: self.span,
                        message: format!(
                            "predicativity: Type {i} inhabits Type {} only, not Type {j}",
                            i + 1
                        ),
                    }),
                    _ => Err(self.mismatch(ctx, t, &exp)),
                }
            }
            _ => {
                let got = self.infer(ctx, mode, t)?;
                if self.convertible(mode, &got, expected)? {
                    Ok(())
                } else {
                    Err(self.conversion_error(ctx, mode, &got, expected))
                }
            }
        }
    }

    fn mismatch(&mut self, ctx: &Context, t: &TermRef, expected_whnf: &TermRef) -> TypeError {
        TypeError::Conversion {
            span: self.span,
            expected: format!("`{}`", self.print(ctx, expected_whnf)),
            found: format!("`{}`", self.print(ctx, t)),
        }
    }
}

fn pi(hint: &str, dom: TermRef, cod: TermRef) -> TermRef {
    Term::Pi {
        hint: hint.into(),
        level: Level::bottom(),
        dom,
        cod,
    }
    .rc()
}

/// Application at the base level; the shape of all built-in schemas.
fn app_base(fun: &TermRef, arg: &TermRef) -> TermRef {
    Term::App {
        fun: fun.clone(),
        level: Level::bottom(),
        arg: arg.clone(),
    }
    .rc()
}

fn v(i: usize) -> TermRef {
    Term::Var(i).rc()
}

fn u0() -> TermRef {
    Term::Universe(0).rc()
}

fn eq(observer: &Level, ty: TermRef, lhs: TermRef, rhs: TermRef) -> TermRef {
    Term::Eq {
        observer: observer.clone(),
        ty,
        lhs,
        rhs,
    }
    .rc()
}

/// The closed type schema of a gated constant. Universe indices are fixed at
/// zero; every equality inside a schema is observed at the construct's home
/// level.
pub fn gated_type(id: GatedId, home: &Level) -> TermRef {
    match id {
        // (A :^{} Type 0) -> (a :^{} A) -> (P :^{} (p :^{} Eq^home A a a) -> Type 0)
        //   -> (p :^{} Eq^home A a a) -> (d :^{} P refl) -> P p
        GatedId::K => pi(
            "A",
            u0(),
            pi(
                "a",
                v(0),
                pi(
                    "P",
                    pi("p", eq(home, v(1), v(0), v(0)), u0()),
                    pi(
                        "p",
                        eq(home, v(2), v(1), v(1)),
                        pi(
                            "d",
                            app_base(&v(1), &Term::Refl.rc()),
                            app_base(&v(2), &v(1)),
                        ),
                    ),
                ),
            ),
        ),
        // (A :^{} Type 0) -> Sum A ((x :^{} A) -> Void)
        GatedId::Em => pi(
            "A",
            u0(),
            Term::SumTy {
                left: v(0),
                right: pi("x", v(0), Term::VoidTy.rc()),
            }
            .rc(),
        ),
        // (A :^{} Type 0) -> (B :^{} (x :^{} A) -> Type 0)
        //   -> (f :^{} (x :^{} A) -> B x) -> (g :^{} (x :^{} A) -> B x)
        //   -> (h :^{} (x :^{} A) -> Eq^home (B x) (f x) (g x))
        //   -> Eq^home ((x :^{} A) -> B x) f g
        GatedId::FunextAx => pi(
            "A",
            u0(),
            pi(
                "B",
                pi("x", v(0), u0()),
                pi(
                    "f",
                    pi("x", v(1), app_base(&v(1), &v(0))),
                    pi(
                        "g",
                        pi("x", v(2), app_base(&v(2), &v(0))),
                        pi(
                            "h",
                            pi(
                                "x",
                                v(3),
                                eq(
                                    home,
                                    app_base(&v(3), &v(0)),
                                    app_base(&v(2), &v(0)),
                                    app_base(&v(1), &v(0)),
                                ),
                            ),
                            eq(home, pi("x", v(4), app_base(&v(4), &v(0))), v(2), v(1)),
                        ),
                    ),
                ),
            ),
        ),
        // (A :^{} Type 0) -> (B :^{} Type 0) -> (e :^{} Equiv A B)
        //   -> Eq^home (Type 0) A B
        GatedId::UaAx => pi(
            "A",
            u0(),
            pi(
                "B",
                u0(),
                pi(
                    "e",
                    equiv_type(home, &v(1), &v(0)),
                    eq(home, u0(), v(2), v(1)),
                ),
            ),
        ),
    }
}

/// Quasi-inverse data: `Sigma (A -> B) (fun f => Sigma (B -> A) (fun g =>
/// Sigma ((x :^{} A) -> Eq^obs A (g (f x)) x) (fun _ =>
/// (y :^{} B) -> Eq^obs B (f (g y)) y)))`.
pub fn equiv_type(observer: &Level, a: &TermRef, b: &TermRef) -> TermRef {
    let lam = |hint: &str, body: TermRef| {
        Term::Lambda {
            hint: hint.into(),
            level: Level::bottom(),
            body,
        }
        .rc()
    };
    let sh = |t: &TermRef, n: usize| term::shift(t, n);
    let inner = {
        // under binder f
        let left_to_right_inverse = pi("x", sh(a, 2), {
            // under binders f(2), g(1), x(0)
            eq(
                observer,
                sh(a, 3),
                app_base(&v(1), &app_base(&v(2), &v(0))),
                v(0),
            )
        });
        let right_to_left_inverse = lam("_", {
            // under binders f(2), g(1), _(0)
            pi("y", sh(b, 3), {
                // under binders f(3), g(2), _(1), y(0)
                eq(
                    observer,
                    sh(b, 4),
                    app_base(&v(3), &app_base(&v(2), &v(0))),
                    v(0),
                )
            })
        });
        Term::SigmaTy {
            fst_ty: pi("y", sh(b, 1), sh(a, 2)),
            snd_fam: lam(
                "g",
                Term::SigmaTy {
                    fst_ty: left_to_right_inverse,
                    snd_fam: right_to_left_inverse,
                }
                .rc(),
            ),
        }
        .rc()
    };
    Term::SigmaTy {
        fst_ty: pi("x", a.clone(), sh(b, 1)),
        snd_fam: lam("f", inner),
    }
    .rc()
}
