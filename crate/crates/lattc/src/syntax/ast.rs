//! Surface abstract syntax, with a source span on every node.

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

/// A level expression: a set literal `{a,b}` or an alias name.
#[derive(Clone, Debug)]
pub struct LevelExpr {
    pub kind: LevelExprKind,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum LevelExprKind {
    Set(Vec<String>),
    Alias(String),
}

impl LevelExpr {
    pub fn empty(span: Span) -> LevelExpr {
        LevelExpr {
            kind: LevelExprKind::Set(Vec::new()),
            span,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Binder {
    pub name: String,
    pub level: Option<LevelExpr>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct STerm {
    pub kind: STermKind,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum STermKind {
    Name(String),
    Universe(u32),
    Fun {
        binders: Vec<Binder>,
        body: Box<STerm>,
    },
    Pi {
        name: String,
        level: Option<LevelExpr>,
        dom: Box<STerm>,
        cod: Box<STerm>,
    },
    /// Non-dependent function type; `level` annotates the domain.
    Arrow {
        level: Option<LevelExpr>,
        dom: Box<STerm>,
        cod: Box<STerm>,
    },
    App {
        fun: Box<STerm>,
        level: Option<LevelExpr>,
        arg: Box<STerm>,
    },
    Eq {
        level: LevelExpr,
        ty: Box<STerm>,
        lhs: Box<STerm>,
        rhs: Box<STerm>,
    },
    Refl,
    J {
        level: LevelExpr,
        scrutinee: Box<STerm>,
        motive: Box<STerm>,
        base: Box<STerm>,
    },
    Absurd {
        scrutinee: Box<STerm>,
        target: Box<STerm>,
    },
    /// Built-in type formers, constructors, eliminators and gated constants,
    /// applied to exactly their arity of arguments.
    Builtin {
        kw: BuiltinKw,
        level: Option<LevelExpr>,
        args: Vec<STerm>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BuiltinKw {
    VoidTy,
    UnitTy,
    BoolTy,
    NatTy,
    ListTy,
    SigmaTy,
    SumTy,
    Tt,
    True,
    False,
    Zero,
    Succ,
    Nil,
    Cons,
    Pair,
    Inl,
    Inr,
    UnitElim,
    BoolElim,
    NatElim,
    ListElim,
    SigmaElim,
    SumElim,
    K,
    Em,
    FunextAx,
    UaAx,
}

impl BuiltinKw {
    pub const ALL: [BuiltinKw; 27] = [
        BuiltinKw::VoidTy,
        BuiltinKw::UnitTy,
        BuiltinKw::BoolTy,
        BuiltinKw::NatTy,
        BuiltinKw::ListTy,
        BuiltinKw::SigmaTy,
        BuiltinKw::SumTy,
        BuiltinKw::Tt,
        BuiltinKw::True,
        BuiltinKw::False,
        BuiltinKw::Zero,
        BuiltinKw::Succ,
        BuiltinKw::Nil,
        BuiltinKw::Cons,
        BuiltinKw::Pair,
        BuiltinKw::Inl,
        BuiltinKw::Inr,
        BuiltinKw::UnitElim,
        BuiltinKw::BoolElim,
        BuiltinKw::NatElim,
        BuiltinKw::ListElim,
        BuiltinKw::SigmaElim,
        BuiltinKw::SumElim,
        BuiltinKw::K,
        BuiltinKw::Em,
        BuiltinKw::FunextAx,
        BuiltinKw::UaAx,
    ];

    pub fn name(self) -> &'static str {
        use BuiltinKw::*;
        match self {
            VoidTy => "Void",
            UnitTy => "Unit",
            BoolTy => "Bool",
            NatTy => "Nat",
            ListTy => "List",
            SigmaTy => "Sigma",
            SumTy => "Sum",
            Tt => "tt",
            True => "true",
            False => "false",
            Zero => "zero",
            Succ => "succ",
            Nil => "nil",
            Cons => "cons",
            Pair => "pair",
            Inl => "inl",
            Inr => "inr",
            UnitElim => "unitElim",
            BoolElim => "boolElim",
            NatElim => "natElim",
            ListElim => "listElim",
            SigmaElim => "sigmaElim",
            SumElim => "sumElim",
            K => "K",
            Em => "em",
            FunextAx => "funext_ax",
            UaAx => "ua_ax",
        }
    }

    pub fn lookup(name: &str) -> Option<BuiltinKw> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn arity(self) -> usize {
        use BuiltinKw::*;
        match self {
            VoidTy | UnitTy | BoolTy | NatTy | Tt | True | False | Zero | Nil | K | Em
            | FunextAx | UaAx => 0,
            ListTy | Succ | Inl | Inr => 1,
            SigmaTy | SumTy | Cons | Pair => 2,
            UnitElim => 3,
            BoolElim | NatElim => 4,
            ListElim | SigmaElim => 5,
            SumElim => 6,
        }
    }

    /// Eliminators carry a scrutinee level annotation.
    pub fn takes_level(self) -> bool {
        use BuiltinKw::*;
        matches!(
            self,
            UnitElim | BoolElim | NatElim | ListElim | SigmaElim | SumElim
        )
    }
}

#[derive(Clone, Debug)]
pub struct SurfaceModule {
    pub decls: Vec<SDecl>,
}

#[derive(Clone, Debug)]
pub struct SDecl {
    pub name: String,
    pub name_span: Span,
    pub span: Span,
    pub kind: SDeclKind,
}

#[derive(Clone, Debug)]
pub enum SDeclKind {
    Def {
        level: Option<LevelExpr>,
        ty: STerm,
        body: STerm,
    },
    Postulate {
        level: Option<LevelExpr>,
        ty: STerm,
    },
    Assert {
        bound: LevelExpr,
    },
}
