//! The `lattc` command line: batch checking, assumption reports and lattice
//! inspection.
//!
//! Exit codes: 0 on success, 1 on a check or assertion failure, 2 on a
//! usage, configuration or parse error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::kernel::GlobalEnv;
use crate::lattice::{self, LatticeConfig};
use crate::pipeline::{self, ModuleOutcome, PipelineError, DEFAULT_FUEL};
use crate::report::{self, ReportFormat};
use crate::syntax::line_col;

#[derive(Parser)]
#[command(
    name = "lattc",
    version,
    about = "Checker for a proof language with a lattice of theory extensions"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check source files in order, printing each declaration's level.
    Check {
        /// Source files (.ltc).
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Lattice configuration file (default: LATTC_LATTICE or embedded).
        #[arg(long)]
        lattice: Option<PathBuf>,
        /// Reduction step budget per declaration.
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Emit machine-readable JSON.
        #[arg(long)]
        json: bool,
        /// Report all errors instead of stopping at the first.
        #[arg(long)]
        keep_going: bool,
        /// Check this file first and keep its definitions in scope.
        #[arg(long)]
        prelude: Option<PathBuf>,
    },
    /// Print the assumption report of one declaration.
    Assumptions {
        file: PathBuf,
        name: String,
        #[arg(long)]
        lattice: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        prelude: Option<PathBuf>,
    },
    /// Inspect or produce lattice configurations.
    Lattice {
        #[command(subcommand)]
        sub: LatticeCmd,
    },
}

#[derive(Subcommand)]
enum LatticeCmd {
    /// Print all legal levels and the meet/join tables.
    Show {
        #[arg(long)]
        lattice: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Check a configuration document against the lattice invariants.
    Validate {
        #[arg(long)]
        lattice: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Write the embedded default configuration.
    Init {
        /// Destination path; stdout when omitted.
        #[arg(long)]
        lattice: Option<PathBuf>,
    },
}

pub fn main() -> i32 {
    run(std::env::args().collect())
}

pub fn run(args: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with success exits.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Cmd::Check {
            files,
            lattice,
            fuel,
            json,
            keep_going,
            prelude,
        } => cmd_check(
            &files,
            lattice.as_deref(),
            fuel,
            json,
            keep_going,
            prelude.as_deref(),
        ),
        Cmd::Assumptions {
            file,
            name,
            lattice,
            fuel,
            json,
            prelude,
        } => cmd_assumptions(
            &file,
            &name,
            lattice.as_deref(),
            fuel,
            json,
            prelude.as_deref(),
        ),
        Cmd::Lattice { sub } => match sub {
            LatticeCmd::Show { lattice, json } => cmd_lattice_show(lattice.as_deref(), json),
            LatticeCmd::Validate { lattice, json } => {
                cmd_lattice_validate(lattice.as_deref(), json)
            }
            LatticeCmd::Init { lattice } => cmd_lattice_init(lattice.as_deref()),
        },
    }
}

fn config_text(path: Option<&Path>) -> Result<(String, String), String> {
    let from_env = std::env::var("LATTC_LATTICE").ok();
    let path = match (path, &from_env) {
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(p)) => Some(PathBuf::from(p)),
        (None, None) => None,
    };
    match path {
        Some(p) => match fs::read_to_string(&p) {
            Ok(text) => Ok((text, p.display().to_string())),
            Err(e) => Err(format!("cannot read lattice config {}: {e}", p.display())),
        },
        None => Ok((lattice::DEFAULT_CONFIG.to_owned(), "<embedded>".to_owned())),
    }
}

fn load_config(path: Option<&Path>) -> Result<LatticeConfig, String> {
    let (text, origin) = config_text(path)?;
    lattice::load_config(&text).map_err(|e| format!("invalid lattice config {origin}: {e}"))
}

fn report_error(file: &Path, source: &str, err: &PipelineError) {
    let (line, col) = line_col(source, err.span().start);
    eprintln!(
        "{}:{line}:{col}: error[{}]: {err}",
        file.display(),
        err.variant_name()
    );
}

struct CheckedFile {
    path: PathBuf,
    outcome: ModuleOutcome,
    source: String,
}

fn check_files(
    cfg: &LatticeConfig,
    files: &[PathBuf],
    fuel: u64,
    keep_going: bool,
    prelude: Option<&Path>,
) -> Result<(Vec<CheckedFile>, GlobalEnv), i32> {
    let mut base = GlobalEnv::new();
    if let Some(p) = prelude {
        let source = match fs::read_to_string(p) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("cannot read prelude {}: {e}", p.display());
                return Err(2);
            }
        };
        match pipeline::check_source(cfg, &mut base, &source, fuel, false) {
            Ok(outcome) => {
                if !outcome.ok() {
                    eprintln!("prelude {} has failing assertions", p.display());
                    return Err(1);
                }
            }
            Err(e) => {
                report_error(p, &source, &e);
                return Err(if e.is_usage_error() { 2 } else { 1 });
            }
        }
    }
    let mut out = Vec::new();
    let mut last_env = base.clone();
    for f in files {
        let source = match fs::read_to_string(f) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("cannot read {}: {e}", f.display());
                return Err(2);
            }
        };
        // Each file is checked independently against the prelude environment.
        let mut env = base.clone();
        match pipeline::check_source(cfg, &mut env, &source, fuel, keep_going) {
            Ok(outcome) => {
                out.push(CheckedFile {
                    path: f.clone(),
                    outcome,
                    source,
                });
                last_env = env;
            }
            Err(e) => {
                report_error(f, &source, &e);
                return Err(if e.is_usage_error() { 2 } else { 1 });
            }
        }
    }
    Ok((out, last_env))
}

fn cmd_check(
    files: &[PathBuf],
    lattice: Option<&Path>,
    fuel: u64,
    json: bool,
    keep_going: bool,
    prelude: Option<&Path>,
) -> i32 {
    let cfg = match load_config(lattice) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let (checked, _) = match check_files(&cfg, files, fuel, keep_going, prelude) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let mut all_ok = true;
    if json {
        let files_json: Vec<_> = checked
            .iter()
            .map(|cf| {
                all_ok &= cf.outcome.ok();
                file_json(cf)
            })
            .collect();
        println!("{}", json!({ "files": files_json, "ok": all_ok }));
    } else {
        for cf in &checked {
            for d in &cf.outcome.decls {
                println!("{} :^{}", d.name, cfg.render_level(&d.level));
            }
            for a in &cf.outcome.assertions {
                if a.passed {
                    println!(
                        "assert_level {} <= {}: ok",
                        a.name,
                        cfg.render_level(&a.bound)
                    );
                } else {
                    let (line, col) = line_col(&cf.source, a.span.start);
                    eprintln!(
                        "{}:{line}:{col}: error[AssertionFailure]: {}",
                        cf.path.display(),
                        a.message.as_deref().unwrap_or("assertion failed")
                    );
                }
            }
            for (name, err) in &cf.outcome.errors {
                let (line, col) = line_col(&cf.source, err.span().start);
                eprintln!(
                    "{}:{line}:{col}: error[{}]{}: {err}",
                    cf.path.display(),
                    err.variant_name(),
                    name.as_deref()
                        .map(|n| format!(" in `{n}`"))
                        .unwrap_or_default()
                );
            }
            all_ok &= cf.outcome.ok();
        }
    }
    if all_ok {
        0
    } else {
        1
    }
}

fn file_json(cf: &CheckedFile) -> serde_json::Value {
    json!({
        "path": cf.path.display().to_string(),
        "declarations": cf.outcome.decls.iter().map(|d| {
            let mut j = report::report_json(&d.report);
            j["name"] = json!(d.name);
            j["postulate"] = json!(d.is_postulate);
            j
        }).collect::<Vec<_>>(),
        "assertions": cf.outcome.assertions.iter().map(|a| json!({
            "name": a.name,
            "bound": a.bound.members().iter().map(|e| e.as_str()).collect::<Vec<_>>(),
            "passed": a.passed,
            "message": a.message,
        })).collect::<Vec<_>>(),
        "errors": cf.outcome.errors.iter().map(|(name, e)| {
            let (line, col) = line_col(&cf.source, e.span().start);
            json!({
                "decl": name,
                "variant": e.variant_name(),
                "line": line,
                "col": col,
                "message": e.to_string(),
            })
        }).collect::<Vec<_>>(),
    })
}

fn cmd_assumptions(
    file: &Path,
    name: &str,
    lattice: Option<&Path>,
    fuel: u64,
    json: bool,
    prelude: Option<&Path>,
) -> i32 {
    let cfg = match load_config(lattice) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let (_, env) = match check_files(
        &cfg,
        std::slice::from_ref(&file.to_path_buf()),
        fuel,
        false,
        prelude,
    ) {
        Ok(x) => x,
        Err(code) => return code,
    };
    match report::assumptions(&env, name) {
        Some(r) => {
            let format = if json {
                ReportFormat::Json
            } else {
                ReportFormat::Text
            };
            println!("{}", report::render(r, format));
            0
        }
        None => {
            eprintln!("no declaration named `{name}` in {}", file.display());
            1
        }
    }
}

fn cmd_lattice_show(lattice: Option<&Path>, json: bool) -> i32 {
    let cfg = match load_config(lattice) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let levels = cfg.legal_levels();
    if json {
        let level_list = |l: &crate::lattice::Level| {
            l.members()
                .iter()
                .map(|e| e.as_str().to_owned())
                .collect::<Vec<_>>()
        };
        let mut meets = Vec::new();
        let mut joins = Vec::new();
        for a in &levels {
            for b in &levels {
                meets.push(json!({
                    "left": level_list(a),
                    "right": level_list(b),
                    "result": level_list(&cfg.meet(a, b)),
                }));
                joins.push(json!({
                    "left": level_list(a),
                    "right": level_list(b),
                    "result": cfg.join(a, b).map(|l| level_list(&l)),
                }));
            }
        }
        println!(
            "{}",
            json!({
                "extensions": cfg.extensions().iter().map(|e| e.as_str()).collect::<Vec<_>>(),
                "levels": levels.iter().map(level_list).collect::<Vec<_>>(),
                "meets": meets,
                "joins": joins,
            })
        );
        return 0;
    }
    println!(
        "extensions: {}",
        cfg.extensions()
            .iter()
            .map(|e| e.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    );
    let mut alias_rows: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for (name, level) in cfg.aliases() {
        alias_rows.entry(level.literal()).or_default().push(name);
    }
    println!("legal levels ({}):", levels.len());
    for l in &levels {
        match alias_rows.get(&l.literal()) {
            Some(aliases) => println!("  {} (aliases: {})", l.literal(), aliases.join(", ")),
            None => println!("  {}", l.literal()),
        }
    }
    println!("meet table:");
    for a in &levels {
        for b in &levels {
            println!(
                "  meet({}, {}) = {}",
                a.literal(),
                b.literal(),
                cfg.meet(a, b).literal()
            );
        }
    }
    println!("join table:");
    for a in &levels {
        for b in &levels {
            match cfg.join(a, b) {
                Some(j) => println!("  join({}, {}) = {}", a.literal(), b.literal(), j.literal()),
                None => println!("  join({}, {}) = (undefined)", a.literal(), b.literal()),
            }
        }
    }
    0
}

fn cmd_lattice_validate(lattice: Option<&Path>, json: bool) -> i32 {
    let (text, origin) = match config_text(lattice) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let raw = match lattice::RawConfig::parse(&text) {
        Ok(raw) => raw,
        Err(e) => {
            eprintln!("invalid lattice config {origin}: {e}");
            return 2;
        }
    };
    let diags = lattice::validate(&raw);
    if json {
        println!(
            "{}",
            json!({
                "diagnostics": diags.iter().map(|d| json!({
                    "invariant": d.invariant,
                    "message": d.message,
                })).collect::<Vec<_>>(),
            })
        );
    } else if diags.is_empty() {
        println!("{origin}: ok");
    } else {
        for d in &diags {
            eprintln!("{origin}: {d}");
        }
    }
    if diags.is_empty() {
        0
    } else {
        1
    }
}

fn cmd_lattice_init(lattice: Option<&Path>) -> i32 {
    match lattice {
        Some(path) => match fs::write(path, lattice::DEFAULT_CONFIG) {
            Ok(()) => {
                println!("wrote {}", path.display());
                0
            }
            Err(e) => {
                eprintln!("cannot write {}: {e}", path.display());
                2
            }
        },
        None => {
            println!("{}", lattice::DEFAULT_CONFIG);
            0
        }
    }
}
