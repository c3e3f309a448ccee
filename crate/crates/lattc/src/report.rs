//! Per-definition extension-usage reports: which gated constants and
//! postulates a definition *uses* in its term (transitively through the
//! bodies of referenced definitions) versus merely *mentions* in types.

use std::collections::BTreeSet;

use serde_json::json;

use crate::kernel::GlobalEnv;
use crate::lattice::Level;

/// What a checked definition depends on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssumptionReport {
    pub level: Level,
    /// Gated constructs and postulate names used in term mode.
    pub term_uses: BTreeSet<String>,
    /// Constructs mentioned only in types. Disjoint from `term_uses`.
    pub type_mentions: BTreeSet<String>,
}

impl AssumptionReport {
    pub fn empty(level: Level) -> AssumptionReport {
        AssumptionReport {
            level,
            term_uses: BTreeSet::new(),
            type_mentions: BTreeSet::new(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ReportFormat {
    Text,
    Json,
}

/// Look up the report computed when `name` was checked.
pub fn assumptions<'e>(env: &'e GlobalEnv, name: &str) -> Option<&'e AssumptionReport> {
    env.get(name).map(|e| &e.report)
}

fn sorted(set: &BTreeSet<String>) -> Vec<&str> {
    set.iter().map(|s| s.as_str()).collect()
}

/// Stable rendering; ids are sorted lexicographically.
pub fn render(report: &AssumptionReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => {
            let list = |set: &BTreeSet<String>| {
                if set.is_empty() {
                    "(none)".to_owned()
                } else {
                    sorted(set).join(", ")
                }
            };
            format!(
                "level: {}\nterm uses: {}\ntype mentions: {}",
                report.level.literal(),
                list(&report.term_uses),
                list(&report.type_mentions),
            )
        }
        ReportFormat::Json => report_json(report).to_string(),
    }
}

pub fn report_json(report: &AssumptionReport) -> serde_json::Value {
    json!({
        "level": report.level.members().iter().map(|e| e.as_str()).collect::<Vec<_>>(),
        "term_uses": sorted(&report.term_uses),
        "type_mentions": sorted(&report.type_mentions),
    })
}

/// One row of a module audit.
#[derive(Clone, Debug)]
pub struct AuditEntry {
    pub name: String,
    pub report: AssumptionReport,
    /// `Some(Ok)` for a passed assertion, `Some(Err(msg))` for a failed one,
    /// `None` for ordinary declarations.
    pub assertion: Option<Result<(), String>>,
}

/// Audit a checked module: one entry per declaration in order, assertion
/// outcomes included.
pub fn audit_module(env: &GlobalEnv, decls: &[crate::kernel::CoreDecl]) -> Vec<AuditEntry> {
    use crate::kernel::CoreDecl;
    let mut out = Vec::new();
    for d in decls {
        match d {
            CoreDecl::Def { name, .. } | CoreDecl::Postulate { name, .. } => {
                if let Some(report) = assumptions(env, name) {
                    out.push(AuditEntry {
                        name: name.clone(),
                        report: report.clone(),
                        assertion: None,
                    });
                }
            }
            CoreDecl::Assert { name, bound, .. } => {
                let outcome = match crate::elaborate::check_assertion(env, name, bound) {
                    Ok(crate::elaborate::AssertionVerdict::Holds) => Ok(()),
                    Ok(crate::elaborate::AssertionVerdict::Fails { offending }) => Err(format!(
                        "level of `{name}` exceeds the asserted bound by {{{}}}",
                        offending.join(",")
                    )),
                    Err(e) => Err(e.to_string()),
                };
                let report = assumptions(env, name)
                    .cloned()
                    .unwrap_or_else(|| AssumptionReport::empty(Level::bottom()));
                out.push(AuditEntry {
                    name: name.clone(),
                    report,
                    assertion: Some(outcome),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_text_format() {
        let r = AssumptionReport::empty(Level::bottom());
        assert_eq!(
            render(&r, ReportFormat::Text),
            "level: {}\nterm uses: (none)\ntype mentions: (none)"
        );
    }

    #[test]
    fn em_report_json_format() {
        let cfg = crate::lattice::LatticeConfig::default_config();
        let cl = cfg.canonicalize(["cl"]).unwrap();
        let mut r = AssumptionReport::empty(cl);
        r.term_uses.insert("em".into());
        assert_eq!(
            render(&r, ReportFormat::Json),
            r#"{"level":["cl"],"term_uses":["em"],"type_mentions":[]}"#
        );
    }

    #[test]
    fn audit_module_lists_declarations_and_assertions() {
        let cfg = crate::lattice::LatticeConfig::default_config();
        let mut env = crate::kernel::GlobalEnv::new();
        let src =
            "def two : Nat := succ (succ zero)\nassert_level two <= {}\nassert_level two <= {uip}";
        crate::pipeline::check_source(&cfg, &mut env, src, 10_000, false).unwrap();
        let decls =
            crate::pipeline::load_module(&cfg, &crate::kernel::GlobalEnv::new(), src).unwrap();
        let audit = audit_module(&env, &decls);
        assert_eq!(audit.len(), 3);
        assert!(audit[0].assertion.is_none());
        assert!(audit[0].report.term_uses.is_empty());
        assert!(matches!(audit[1].assertion, Some(Ok(()))));
        assert!(matches!(audit[2].assertion, Some(Ok(()))));
    }

    #[test]
    fn audit_module_counts_failed_assertions() {
        let cfg = crate::lattice::LatticeConfig::default_config();
        let mut env = crate::kernel::GlobalEnv::new();
        let src = "postulate ax :^{cl} Nat\ndef usesAx :^{cl} Nat := ax\nassert_level usesAx <= {}";
        crate::pipeline::check_source(&cfg, &mut env, src, 10_000, false).unwrap();
        let decls =
            crate::pipeline::load_module(&cfg, &crate::kernel::GlobalEnv::new(), src).unwrap();
        let audit = audit_module(&env, &decls);
        let failed = audit
            .iter()
            .filter(|e| matches!(e.assertion, Some(Err(_))))
            .count();
        assert_eq!(failed, 1);
        assert!(audit[1].report.term_uses.contains("ax"));
    }

    #[test]
    fn ids_sort_lexicographically() {
        let mut r = AssumptionReport::empty(Level::bottom());
        r.term_uses.insert("zeroNotGt".into());
        r.term_uses.insert("K".into());
        r.term_uses.insert("em".into());
        assert_eq!(
            render(&r, ReportFormat::Text).lines().nth(1).unwrap(),
            "term uses: K, em, zeroNotGt"
        );
    }
}
