//! Seeded generators of well-typed terms for the property-based acceptance
//! criteria. Kept independent of the checker internals: everything goes
//! through the public kernel API, and every generated term is validated by
//! the checker itself before it is used.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lattc::kernel::{self, GlobalEnv};
use lattc::lattice::{LatticeConfig, Level};
use lattc::pipeline::DEFAULT_FUEL;
use lattc::term::{Term, TermRef};

/// A three-point chain L < H < S, as marker extensions {h} and {h,s}.
pub fn chain_config() -> LatticeConfig {
    lattc::lattice::load_config(
        r#"{"extensions": ["h", "s"],
            "implies": [["s", "h"]],
            "aliases": {"L": [], "H": ["h"], "S": ["h", "s"]}}"#,
    )
    .unwrap()
}

/// Simple object-language types the generators work with.
#[derive(Clone, PartialEq, Debug)]
enum GenTy {
    Nat,
    Bool,
    Fun(Level, Box<GenTy>, Box<GenTy>),
    /// A context entry the generator must not touch (case binders of shapes
    /// it does not model).
    Opaque,
}

impl GenTy {
    fn to_term(&self) -> TermRef {
        match self {
            GenTy::Nat => Term::NatTy.rc(),
            GenTy::Bool => Term::BoolTy.rc(),
            GenTy::Fun(level, a, b) => Term::Pi {
                hint: "x".into(),
                level: level.clone(),
                dom: a.to_term(),
                // Generated types are closed, so no shifting is needed.
                cod: b.to_term(),
            }
            .rc(),
            GenTy::Opaque => unreachable!("opaque entries are never materialised"),
        }
    }
}

fn base_motive(ty: &GenTy) -> TermRef {
    Term::Lambda {
        hint: "_".into(),
        level: Level::bottom(),
        body: ty.to_term(),
    }
    .rc()
}

fn app(fun: TermRef, level: Level, arg: TermRef) -> TermRef {
    Term::App { fun, level, arg }.rc()
}

struct Gen {
    rng: ChaCha8Rng,
    cfg: LatticeConfig,
    levels: Vec<Level>,
}

impl Gen {
    fn pick_level(&mut self) -> Level {
        let i = self.rng.random_range(0..self.levels.len());
        self.levels[i].clone()
    }

    /// A level whose join with `obs` exists.
    fn pick_joinable_level(&mut self, obs: &Level) -> Level {
        loop {
            let l = self.pick_level();
            if self.cfg.join(obs, &l).is_some() {
                return l;
            }
        }
    }

    fn gen_ty(&mut self, depth: usize) -> GenTy {
        if depth > 0 && self.rng.random_bool(0.4) {
            let l = self.pick_level();
            GenTy::Fun(
                l,
                Box::new(self.gen_ty(depth - 1)),
                Box::new(self.gen_ty(depth - 1)),
            )
        } else if self.rng.random_bool(0.5) {
            GenTy::Nat
        } else {
            GenTy::Bool
        }
    }

    fn gen_ctx(&mut self, n: usize) -> Vec<(String, Level, GenTy)> {
        (0..n)
            .map(|i| {
                let ty = self.gen_ty(1);
                let level = self.pick_level();
                (format!("v{i}"), level, ty)
            })
            .collect()
    }

    fn literal(&mut self, ty: &GenTy) -> TermRef {
        match ty {
            GenTy::Nat => {
                let mut t = Term::Zero.rc();
                for _ in 0..self.rng.random_range(0..3) {
                    t = Term::Succ(t).rc();
                }
                t
            }
            GenTy::Bool => {
                if self.rng.random_bool(0.5) {
                    Term::True.rc()
                } else {
                    Term::False.rc()
                }
            }
            _ => unreachable!("literals exist only at base types"),
        }
    }

    /// Variables of the wanted type accessible at the observer. Indices are
    /// de Bruijn (0 = innermost entry).
    fn usable_vars(&self, ctx: &[(String, Level, GenTy)], ty: &GenTy, obs: &Level) -> Vec<usize> {
        ctx.iter()
            .rev()
            .enumerate()
            .filter(|(_, (_, level, t))| t == ty && level.leq(obs))
            .map(|(i, _)| i)
            .collect()
    }

    /// Functions in scope returning `ty`, usable at the observer.
    fn usable_funs(
        &self,
        ctx: &[(String, Level, GenTy)],
        ty: &GenTy,
        obs: &Level,
    ) -> Vec<(usize, Level, GenTy)> {
        ctx.iter()
            .rev()
            .enumerate()
            .filter_map(|(i, (_, level, t))| match t {
                GenTy::Fun(l1, a, b) if **b == *ty && level.leq(obs) => {
                    Some((i, l1.clone(), (**a).clone()))
                }
                _ => None,
            })
            .collect()
    }
}

/// Generator of pairs of well-typed terms that may differ beneath highly
/// annotated positions, for the downgrade property.
pub struct PairGen {
    gen: Gen,
    env: GlobalEnv,
}

impl PairGen {
    pub fn new(cfg: &LatticeConfig, seed: u64) -> PairGen {
        PairGen {
            gen: Gen {
                rng: ChaCha8Rng::seed_from_u64(seed),
                cfg: cfg.clone(),
                levels: cfg.legal_levels(),
            },
            env: GlobalEnv::new(),
        }
    }

    /// A context, two terms of one type, and the observer at which both were
    /// built (the top of the chain). Both sides are validated by the checker.
    pub fn pair(&mut self, _i: usize) -> (GlobalEnv, TermRef, TermRef, Level) {
        let top = self.gen.cfg.canonicalize(["h", "s"]).expect("chain top");
        let n = self.gen.rng.random_range(3..6);
        let ctx = self.gen.gen_ctx(n);
        let ty = self.gen.gen_ty(1);
        let (a, b) = self.pair_at(&ctx, &ty, &top, 3);
        // Validate both sides at the top observer.
        let mut kctx = kernel::Context::new();
        for (hint, level, t) in &ctx {
            kctx.push(hint, level.clone(), t.to_term());
        }
        let tty = ty.to_term();
        for side in [&a, &b] {
            kernel::check_term(
                &self.env,
                &self.gen.cfg,
                &mut kctx,
                &top,
                side,
                &tty,
                DEFAULT_FUEL,
            )
            .unwrap_or_else(|e| panic!("generated pair side does not check: {e}"));
        }
        (self.env.clone(), a, b, top)
    }

    fn one_at(
        &mut self,
        ctx: &[(String, Level, GenTy)],
        ty: &GenTy,
        obs: &Level,
        depth: usize,
    ) -> TermRef {
        self.pair_at(ctx, ty, obs, depth).0
    }

    fn pair_at(
        &mut self,
        ctx: &[(String, Level, GenTy)],
        ty: &GenTy,
        obs: &Level,
        depth: usize,
    ) -> (TermRef, TermRef) {
        if let GenTy::Fun(l, a, b) = ty {
            if depth == 0 {
                // No smaller form exists; eta-expand a literal-returning body.
                let mut ctx2 = ctx.to_vec();
                ctx2.push(("x".into(), l.clone(), (**a).clone()));
                let (b0, b1) = self.pair_at(&ctx2, b, obs, 0);
                let wrap = |body| {
                    Term::Lambda {
                        hint: "x".into(),
                        level: l.clone(),
                        body,
                    }
                    .rc()
                };
                return (wrap(b0), wrap(b1));
            }
            let mut ctx2 = ctx.to_vec();
            ctx2.push(("x".into(), l.clone(), (**a).clone()));
            let (b0, b1) = self.pair_at(&ctx2, b, obs, depth - 1);
            let wrap = |body| {
                Term::Lambda {
                    hint: "x".into(),
                    level: l.clone(),
                    body,
                }
                .rc()
            };
            return (wrap(b0), wrap(b1));
        }

        let vars = self.gen.usable_vars(ctx, ty, obs);
        let funs = self.gen.usable_funs(ctx, ty, obs);
        let choice = self.gen.rng.random_range(0..10);
        match choice {
            // Same variable on both sides.
            0..=2 if !vars.is_empty() => {
                let i = vars[self.gen.rng.random_range(0..vars.len())];
                (Term::Var(i).rc(), Term::Var(i).rc())
            }
            // Application of one function; arguments may diverge when the
            // annotation is above bottom.
            3..=5 if depth > 0 && !funs.is_empty() => {
                let (i, l1, arg_ty) = funs[self.gen.rng.random_range(0..funs.len())].clone();
                let arg_obs = self
                    .gen
                    .cfg
                    .join(obs, &l1)
                    .expect("chain levels always join");
                let f = Term::Var(i).rc();
                if !l1.is_empty() && self.gen.rng.random_bool(0.6) {
                    let a0 = self.one_at(ctx, &arg_ty, &arg_obs, depth - 1);
                    let a1 = self.one_at(ctx, &arg_ty, &arg_obs, depth - 1);
                    (app(f.clone(), l1.clone(), a0), app(f, l1, a1))
                } else {
                    let (a0, a1) = self.pair_at(ctx, &arg_ty, &arg_obs, depth - 1);
                    (app(f.clone(), l1.clone(), a0), app(f, l1, a1))
                }
            }
            // A boolean elimination; the scrutinee may diverge when its
            // annotation is above bottom.
            6..=7 if depth > 0 => {
                let ls = self.gen.pick_joinable_level(obs);
                if !ls.leq(obs) {
                    return (self.gen.literal(ty), self.gen.literal(ty));
                }
                let (t0, t1) = self.pair_at(ctx, ty, obs, depth - 1);
                let (f0, f1) = self.pair_at(ctx, ty, obs, depth - 1);
                let (s0, s1) = if !ls.is_empty() && self.gen.rng.random_bool(0.6) {
                    (
                        self.one_at(ctx, &GenTy::Bool, obs, depth - 1),
                        self.one_at(ctx, &GenTy::Bool, obs, depth - 1),
                    )
                } else {
                    self.pair_at(ctx, &GenTy::Bool, obs, depth - 1)
                };
                let mk = |t, f, s| {
                    Term::BoolElim {
                        level: ls.clone(),
                        motive: base_motive(ty),
                        true_case: t,
                        false_case: f,
                        scrutinee: s,
                    }
                    .rc()
                };
                (mk(t0, f0, s0), mk(t1, f1, s1))
            }
            // Literals; occasionally independent, giving honest negatives.
            _ => {
                if self.gen.rng.random_bool(0.15) {
                    (self.gen.literal(ty), self.gen.literal(ty))
                } else {
                    let l = self.gen.literal(ty);
                    (l.clone(), l)
                }
            }
        }
    }
}

/// Generator of single well-typed terms at a chosen observer, for the
/// qualified subsumption property over the default lattice.
pub struct SubsumptionGen {
    gen: Gen,
    env: GlobalEnv,
}

type CtxEntries = Vec<(String, Level, TermRef)>;

impl SubsumptionGen {
    pub fn new(cfg: &LatticeConfig, seed: u64) -> SubsumptionGen {
        SubsumptionGen {
            gen: Gen {
                rng: ChaCha8Rng::seed_from_u64(seed),
                cfg: cfg.clone(),
                levels: cfg.legal_levels(),
            },
            env: GlobalEnv::new(),
        }
    }

    /// A term together with its context, type and construction observer.
    pub fn term(&mut self, _i: usize) -> (GlobalEnv, CtxEntries, TermRef, TermRef, Level) {
        let l0 = self.gen.pick_level();
        let n = self.gen.rng.random_range(3..6);
        let ctx = self.gen.gen_ctx(n);
        let ty = self.gen.gen_ty(1);
        let t = self.term_at(&ctx, &ty, &l0, 3);
        let entries: CtxEntries = ctx
            .iter()
            .map(|(h, l, t)| (h.clone(), l.clone(), t.to_term()))
            .collect();
        (self.env.clone(), entries, t, ty.to_term(), l0)
    }

    fn term_at(
        &mut self,
        ctx: &[(String, Level, GenTy)],
        ty: &GenTy,
        obs: &Level,
        depth: usize,
    ) -> TermRef {
        if let GenTy::Fun(l, a, b) = ty {
            let mut ctx2 = ctx.to_vec();
            ctx2.push(("x".into(), l.clone(), (**a).clone()));
            let body = self.term_at(&ctx2, b, obs, depth.saturating_sub(1));
            return Term::Lambda {
                hint: "x".into(),
                level: l.clone(),
                body,
            }
            .rc();
        }
        let vars = self.gen.usable_vars(ctx, ty, obs);
        let funs = self.gen.usable_funs(ctx, ty, obs);
        let cl = self.gen.cfg.canonicalize(["cl"]).expect("cl is legal");
        let choice = self.gen.rng.random_range(0..12);
        match choice {
            0..=2 if !vars.is_empty() => {
                let i = vars[self.gen.rng.random_range(0..vars.len())];
                Term::Var(i).rc()
            }
            3..=5 if depth > 0 && !funs.is_empty() => {
                let (i, l1, arg_ty) = funs[self.gen.rng.random_range(0..funs.len())].clone();
                match self.gen.cfg.join(obs, &l1) {
                    Some(arg_obs) => {
                        let arg = self.term_at(ctx, &arg_ty, &arg_obs, depth - 1);
                        app(Term::Var(i).rc(), l1, arg)
                    }
                    None => self.gen.literal(ty),
                }
            }
            6..=7 if depth > 0 => {
                // An eliminator whose scrutinee annotation stays accessible.
                let below: Vec<Level> = self
                    .gen
                    .levels
                    .iter()
                    .filter(|l| l.leq(obs))
                    .cloned()
                    .collect();
                let ls = below[self.gen.rng.random_range(0..below.len())].clone();
                Term::BoolElim {
                    level: ls,
                    motive: base_motive(ty),
                    true_case: self.term_at(ctx, ty, obs, depth - 1),
                    false_case: self.term_at(ctx, ty, obs, depth - 1),
                    scrutinee: self.term_at(ctx, &GenTy::Bool, obs, depth - 1),
                }
                .rc()
            }
            // Classical detour: decide an equation with em and return from
            // both branches. Exercises the gate under raised observers.
            8 if depth > 0 && *ty == GenTy::Nat && cl.leq(obs) => {
                let scrutinee = app(
                    Term::Gated(lattc::lattice::GatedId::Em).rc(),
                    Level::bottom(),
                    Term::BoolTy.rc(),
                );
                let right = Term::Pi {
                    hint: "x".into(),
                    level: Level::bottom(),
                    dom: Term::BoolTy.rc(),
                    cod: Term::VoidTy.rc(),
                }
                .rc();
                let mut ctx2 = ctx.to_vec();
                ctx2.push(("w".into(), Level::bottom(), GenTy::Opaque));
                let inl_body = self.term_at(&ctx2, ty, obs, depth - 1);
                let inr_body = self.term_at(&ctx2, ty, obs, depth - 1);
                let case = |body| {
                    Term::Lambda {
                        hint: "w".into(),
                        level: Level::bottom(),
                        body,
                    }
                    .rc()
                };
                Term::SumElim {
                    level: Level::bottom(),
                    left: Term::BoolTy.rc(),
                    right,
                    motive: base_motive(ty),
                    inl_case: case(inl_body),
                    inr_case: case(inr_body),
                    scrutinee,
                }
                .rc()
            }
            _ => self.gen.literal(ty),
        }
    }
}
