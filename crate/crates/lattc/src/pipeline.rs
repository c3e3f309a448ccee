//! The batch-checking pipeline: parse, default annotations, resolve, check,
//! audit. Used by the command line, the Python bindings and the test suites.

use std::fmt;

use crate::elaborate::{self, AssertionVerdict};
use crate::kernel::{self, CoreDecl, GlobalEnv, TypeError};
use crate::lattice::{LatticeConfig, Level};
use crate::report::AssumptionReport;
use crate::syntax::ast::Span;
use crate::syntax::{parser, resolve, ParseError, ResolveError};

pub const DEFAULT_FUEL: u64 = 100_000;

#[derive(Debug)]
pub enum PipelineError {
    Parse(ParseError),
    Resolve(ResolveError),
    Type(TypeError),
}

impl PipelineError {
    pub fn span(&self) -> Span {
        match self {
            PipelineError::Parse(e) => e.span,
            PipelineError::Resolve(e) => e.span,
            PipelineError::Type(e) => e.span(),
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            PipelineError::Parse(_) => "ParseError",
            PipelineError::Resolve(e) => e.variant_name(),
            PipelineError::Type(e) => e.variant_name(),
        }
    }

    /// Parse and configuration problems exit with 2; checking failures
    /// with 1.
    pub fn is_usage_error(&self) -> bool {
        matches!(self, PipelineError::Parse(_))
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::Parse(e) => write!(f, "{e}"),
            PipelineError::Resolve(e) => write!(f, "{e}"),
            PipelineError::Type(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for PipelineError {}

#[derive(Clone, Debug)]
pub struct DeclOutcome {
    pub name: String,
    pub level: Level,
    pub report: AssumptionReport,
    pub is_postulate: bool,
}

#[derive(Clone, Debug)]
pub struct AssertionOutcome {
    pub name: String,
    pub bound: Level,
    pub passed: bool,
    pub message: Option<String>,
    pub span: Span,
}

#[derive(Debug, Default)]
pub struct ModuleOutcome {
    pub decls: Vec<DeclOutcome>,
    pub assertions: Vec<AssertionOutcome>,
    /// Failures recorded under `--keep-going`; the failing declaration is
    /// skipped and checking continues.
    pub errors: Vec<(Option<String>, PipelineError)>,
}

impl ModuleOutcome {
    pub fn ok(&self) -> bool {
        self.errors.is_empty() && self.assertions.iter().all(|a| a.passed)
    }
}

/// Check one module's source against (and extending) `env`.
///
/// Without `keep_going` the first failure aborts; with it, failures are
/// collected and the offending declarations skipped.
pub fn check_source(
    cfg: &LatticeConfig,
    env: &mut GlobalEnv,
    source: &str,
    fuel: u64,
    keep_going: bool,
) -> Result<ModuleOutcome, PipelineError> {
    let module = parser::parse_module(source).map_err(PipelineError::Parse)?;
    let mut outcome = ModuleOutcome::default();
    let mut module_names: Vec<String> = Vec::new();
    for sdecl in &module.decls {
        let sdecl = elaborate::default_annotations(sdecl);
        let step = (|| -> Result<(), PipelineError> {
            let decl = resolve::resolve_decl(&sdecl, cfg, env, &module_names)
                .map_err(PipelineError::Resolve)?;
            match &decl {
                CoreDecl::Assert { name, bound, span } => {
                    let verdict = elaborate::check_assertion(env, name, bound).map_err(|e| {
                        PipelineError::Type(TypeError::Scope {
                            span: *span,
                            message: e.to_string(),
                        })
                    })?;
                    let (passed, message) = match verdict {
                        AssertionVerdict::Holds => (true, None),
                        AssertionVerdict::Fails { offending } => (
                            false,
                            Some(format!(
                                "assert_level {name} <= {} failed: level exceeds the bound by {{{}}}",
                                cfg.render_level(bound),
                                offending.join(",")
                            )),
                        ),
                    };
                    outcome.assertions.push(AssertionOutcome {
                        name: name.clone(),
                        bound: bound.clone(),
                        passed,
                        message,
                        span: *span,
                    });
                }
                _ => {
                    let result = kernel::check_declaration(env, cfg, &decl, fuel)
                        .map_err(PipelineError::Type)?;
                    outcome.decls.push(DeclOutcome {
                        name: result.name,
                        level: result.level,
                        report: result.report,
                        is_postulate: matches!(decl, CoreDecl::Postulate { .. }),
                    });
                }
            }
            Ok(())
        })();
        match step {
            Ok(()) => module_names.push(sdecl.name.clone()),
            Err(e) => {
                if keep_going && !matches!(e, PipelineError::Parse(_)) {
                    outcome.errors.push((Some(sdecl.name.clone()), e));
                } else {
                    return Err(e);
                }
            }
        }
    }
    Ok(outcome)
}

/// Parse and resolve a module without checking it. The round-trip tests and
/// the printer work on this form.
pub fn load_module(
    cfg: &LatticeConfig,
    env: &GlobalEnv,
    source: &str,
) -> Result<Vec<CoreDecl>, PipelineError> {
    let module = parser::parse_module(source).map_err(PipelineError::Parse)?;
    let defaulted: Vec<_> = module
        .decls
        .iter()
        .map(elaborate::default_annotations)
        .collect();
    resolve::resolve_module(
        &crate::syntax::ast::SurfaceModule { decls: defaulted },
        cfg,
        env,
    )
    .map_err(PipelineError::Resolve)
}
