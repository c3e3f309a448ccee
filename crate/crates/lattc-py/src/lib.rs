//! Python bindings: the theory lattice and the batch checker.
//!
//! Levels cross the boundary as sorted lists of extension names.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use lattc::kernel::GlobalEnv;
use lattc::lattice::{self, LatticeConfig, Level};
use lattc::pipeline::{self, DEFAULT_FUEL};
use lattc::syntax::{line_col, print_module};

fn level_to_list(level: &Level) -> Vec<String> {
    level
        .members()
        .iter()
        .map(|e| e.as_str().to_owned())
        .collect()
}

fn value_error(msg: String) -> PyErr {
    PyValueError::new_err(msg)
}

fn located(source: &str, err: &pipeline::PipelineError) -> PyErr {
    let (line, col) = line_col(source, err.span().start);
    value_error(format!(
        "{line}:{col}: error[{}]: {err}",
        err.variant_name()
    ))
}

/// A configurable meet-semilattice of theory extensions.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Lattice {
    cfg: LatticeConfig,
}

#[pymethods]
impl Lattice {
    /// Load a lattice from a JSON document; the embedded default when None.
    #[new]
    #[pyo3(signature = (json=None))]
    fn new(json: Option<&str>) -> PyResult<Lattice> {
        let text = json.unwrap_or(lattice::DEFAULT_CONFIG);
        let cfg = lattice::load_config(text).map_err(|e| value_error(e.to_string()))?;
        Ok(Lattice { cfg })
    }

    /// The raw JSON of the embedded default configuration.
    #[staticmethod]
    fn default_json() -> &'static str {
        lattice::DEFAULT_CONFIG
    }

    /// Validate a configuration document, returning one message per violated
    /// invariant.
    #[staticmethod]
    fn validate(json: &str) -> PyResult<Vec<String>> {
        let raw = lattice::RawConfig::parse(json).map_err(|e| value_error(e.to_string()))?;
        Ok(lattice::validate(&raw)
            .iter()
            .map(|d| d.to_string())
            .collect())
    }

    #[getter]
    fn extensions(&self) -> Vec<String> {
        self.cfg
            .extensions()
            .iter()
            .map(|e| e.as_str().to_owned())
            .collect()
    }

    /// Close a raw extension set under implication; raises on illegal sets.
    fn canonicalize(&self, raw: Vec<String>) -> PyResult<Vec<String>> {
        let level = self
            .cfg
            .canonicalize(raw.iter().map(|s| s.as_str()))
            .map_err(|e| value_error(e.to_string()))?;
        Ok(level_to_list(&level))
    }

    fn leq(&self, lo: Vec<String>, hi: Vec<String>) -> PyResult<bool> {
        let (lo, hi) = (self.level(lo)?, self.level(hi)?);
        Ok(self.cfg.leq(&lo, &hi))
    }

    fn meet(&self, a: Vec<String>, b: Vec<String>) -> PyResult<Vec<String>> {
        let (a, b) = (self.level(a)?, self.level(b)?);
        Ok(level_to_list(&self.cfg.meet(&a, &b)))
    }

    /// The join, or None when the two levels are incompatible.
    fn join(&self, a: Vec<String>, b: Vec<String>) -> PyResult<Option<Vec<String>>> {
        let (a, b) = (self.level(a)?, self.level(b)?);
        Ok(self.cfg.join(&a, &b).map(|l| level_to_list(&l)))
    }

    /// Every legal level, ordered by size then members.
    fn levels(&self) -> Vec<Vec<String>> {
        self.cfg.legal_levels().iter().map(level_to_list).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Lattice(extensions=[{}], levels={})",
            self.extensions().join(", "),
            self.cfg.legal_levels().len()
        )
    }
}

impl Lattice {
    fn level(&self, raw: Vec<String>) -> PyResult<Level> {
        self.cfg
            .canonicalize(raw.iter().map(|s| s.as_str()))
            .map_err(|e| value_error(e.to_string()))
    }
}

/// One checked declaration with its level and assumption report.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Declaration {
    #[pyo3(get)]
    name: String,
    #[pyo3(get)]
    level: Vec<String>,
    #[pyo3(get)]
    term_uses: Vec<String>,
    #[pyo3(get)]
    type_mentions: Vec<String>,
    #[pyo3(get)]
    is_postulate: bool,
}

#[pymethods]
impl Declaration {
    fn __repr__(&self) -> String {
        format!(
            "Declaration(name={:?}, level={:?}, term_uses={:?}, type_mentions={:?})",
            self.name, self.level, self.term_uses, self.type_mentions
        )
    }
}

/// Outcome of one `assert_level` pragma.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Assertion {
    #[pyo3(get)]
    name: String,
    #[pyo3(get)]
    bound: Vec<String>,
    #[pyo3(get)]
    passed: bool,
    #[pyo3(get)]
    message: Option<String>,
}

#[pymethods]
impl Assertion {
    fn __repr__(&self) -> String {
        format!(
            "Assertion(name={:?}, bound={:?}, passed={})",
            self.name, self.bound, self.passed
        )
    }
}

/// A fully checked module.
#[pyclass]
struct CheckedModule {
    #[pyo3(get)]
    declarations: Vec<Declaration>,
    #[pyo3(get)]
    assertions: Vec<Assertion>,
}

#[pymethods]
impl CheckedModule {
    /// True when every assertion passed.
    #[getter]
    fn ok(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// The assumption report of one declaration.
    fn assumptions(&self, name: &str) -> PyResult<Declaration> {
        self.declarations
            .iter()
            .find(|d| d.name == name)
            .cloned()
            .ok_or_else(|| value_error(format!("no declaration named `{name}`")))
    }

    fn __repr__(&self) -> String {
        format!(
            "CheckedModule({} declarations, {} assertions, ok={})",
            self.declarations.len(),
            self.assertions.len(),
            self.ok()
        )
    }
}

/// Check a module source; raises ValueError with a located message on the
/// first failure. An optional prelude source is checked first and stays in
/// scope.
#[pyfunction]
#[pyo3(signature = (source, lattice=None, fuel=None, prelude=None))]
fn check_source(
    source: &str,
    lattice: Option<&Lattice>,
    fuel: Option<u64>,
    prelude: Option<&str>,
) -> PyResult<CheckedModule> {
    let cfg = match lattice {
        Some(l) => l.cfg.clone(),
        None => LatticeConfig::default_config(),
    };
    let fuel = fuel.unwrap_or(DEFAULT_FUEL);
    let mut env = GlobalEnv::new();
    if let Some(prelude) = prelude {
        pipeline::check_source(&cfg, &mut env, prelude, fuel, false)
            .map_err(|e| located(prelude, &e))?;
    }
    let outcome = pipeline::check_source(&cfg, &mut env, source, fuel, false)
        .map_err(|e| located(source, &e))?;
    Ok(CheckedModule {
        declarations: outcome
            .decls
            .iter()
            .map(|d| Declaration {
                name: d.name.clone(),
                level: level_to_list(&d.level),
                term_uses: d.report.term_uses.iter().cloned().collect(),
                type_mentions: d.report.type_mentions.iter().cloned().collect(),
                is_postulate: d.is_postulate,
            })
            .collect(),
        assertions: outcome
            .assertions
            .iter()
            .map(|a| Assertion {
                name: a.name.clone(),
                bound: level_to_list(&a.bound),
                passed: a.passed,
                message: a.message.clone(),
            })
            .collect(),
    })
}

/// Parse, resolve and pretty-print a module without checking it.
#[pyfunction]
#[pyo3(signature = (source, lattice=None))]
fn format_source(source: &str, lattice: Option<&Lattice>) -> PyResult<String> {
    let cfg = match lattice {
        Some(l) => l.cfg.clone(),
        None => LatticeConfig::default_config(),
    };
    let env = GlobalEnv::new();
    let decls = pipeline::load_module(&cfg, &env, source).map_err(|e| located(source, &e))?;
    Ok(print_module(&cfg, &decls))
}

#[pymodule]
fn lattc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Lattice>()?;
    m.add_class::<Declaration>()?;
    m.add_class::<Assertion>()?;
    m.add_class::<CheckedModule>()?;
    m.add_function(wrap_pyfunction!(check_source, m)?)?;
    m.add_function(wrap_pyfunction!(format_source, m)?)?;
    Ok(())
}
