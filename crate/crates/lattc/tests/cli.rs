//! End-to-end tests of the `lattc` binary: exit codes, output determinism
//! and the JSON schemas.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(name)
}

fn lattc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lattc"))
        .args(args)
        .env_remove("LATTC_LATTICE")
        .output()
        .expect("spawn lattc")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn tmp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lattc-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_base_corpus_succeeds_deterministically() {
    let file = corpus("base.ltc");
    let first = lattc(&["check", path_str(&file)]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let text = stdout(&first);
    assert!(text.contains("id :^L"), "{text}");
    assert!(text.contains("trueNotFalse :^L"), "{text}");
    let second = lattc(&["check", path_str(&file)]);
    assert_eq!(stdout(&second), text, "output is not deterministic");
}

#[test]
fn check_failures_use_exit_code_one() {
    let out = lattc(&["check", path_str(&corpus("neg_join.ltc"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("LevelJoinError"), "{}", stderr(&out));

    let out = lattc(&["check", path_str(&corpus("neg_assert.ltc"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("AssertionFailure"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn missing_inputs_use_exit_code_two() {
    let out = lattc(&["check", "/nonexistent/input.ltc"]);
    assert_eq!(out.status.code(), Some(2));
    let out = lattc(&[
        "check",
        path_str(&corpus("base.ltc")),
        "--lattice",
        "/nonexistent/lattice.json",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_errors_use_exit_code_two() {
    let bad = tmp_file("bad_parse.ltc", "def bad := :=\n");
    let out = lattc(&["check", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("ParseError"), "{}", stderr(&out));
}

#[test]
fn keep_going_reports_every_error() {
    let two_bad = tmp_file(
        "two_bad.ltc",
        r#"
postulate A :^H Type 0
def leak1 :^L (y :^H A) -> A := fun y^H => y
def ok : Nat := zero
def leak2 :^L (y :^H A) -> A := fun y^H => y
"#,
    );
    let out = lattc(&["check", path_str(&two_bad), "--keep-going"]);
    assert_eq!(out.status.code(), Some(1));
    let errors = stderr(&out);
    assert_eq!(errors.matches("VarLevelError").count(), 2, "{errors}");
    assert!(stdout(&out).contains("ok :^L"));
}

#[test]
fn check_json_schema() {
    let out = lattc(&["check", path_str(&corpus("classical.ltc")), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(doc["ok"], serde_json::json!(true));
    let decls = doc["files"][0]["declarations"].as_array().unwrap();
    let dne = decls.iter().find(|d| d["name"] == "dne").unwrap();
    assert_eq!(dne["level"], serde_json::json!(["cl"]));
    assert_eq!(dne["term_uses"], serde_json::json!(["em"]));
}

#[test]
fn assumptions_command() {
    let out = lattc(&[
        "assumptions",
        path_str(&corpus("classical.ltc")),
        "dnFromEm",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("level: {cl}"), "{text}");
    assert!(text.contains("term uses: em"), "{text}");

    let out = lattc(&["assumptions", path_str(&corpus("base.ltc")), "id"]);
    assert_eq!(
        stdout(&out),
        "level: {}\nterm uses: (none)\ntype mentions: (none)\n"
    );

    let out = lattc(&["assumptions", path_str(&corpus("base.ltc")), "nosuch"]);
    assert_eq!(out.status.code(), Some(1));

    let out = lattc(&[
        "assumptions",
        path_str(&corpus("classical.ltc")),
        "dnFromEm",
        "--json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(doc["term_uses"], serde_json::json!(["em"]));
}

#[test]
fn prelude_flag_extends_the_environment() {
    let out = lattc(&[
        "check",
        path_str(&corpus("uses_prelude.ltc")),
        "--prelude",
        path_str(&corpus("prelude.ltc")),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    // Without the prelude the same file is out of scope.
    let out = lattc(&["check", path_str(&corpus("uses_prelude.ltc"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("ScopeError"));
}

#[test]
fn lattice_show_lists_undefined_joins() {
    let out = lattc(&["lattice", "show"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.contains("join({uip}, {funext,ua}) = (undefined)"),
        "{text}"
    );
    assert!(text.contains("meet({uip}, {funext,ua}) = {}"), "{text}");
    let out_json = lattc(&["lattice", "show", "--json"]);
    let doc: serde_json::Value = serde_json::from_str(stdout(&out_json).trim()).unwrap();
    assert!(doc["levels"].as_array().unwrap().len() >= 16);
}

#[test]
fn lattice_validate_and_init() {
    let out = lattc(&["lattice", "validate"]);
    assert_eq!(out.status.code(), Some(0));

    let out = lattc(&["lattice", "validate", "--json"]);
    let doc: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(doc["diagnostics"], serde_json::json!([]));

    let target = tmp_file("written-lattice.json", "");
    let out = lattc(&["lattice", "init", "--lattice", path_str(&target)]);
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read_to_string(&target).unwrap();
    assert_eq!(written, lattc::lattice::DEFAULT_CONFIG);

    // A config with an illegal home level fails validation with exit 1.
    let bad = tmp_file(
        "bad-lattice.json",
        r#"{"extensions": ["uip", "funext", "ua"],
            "implies": [["ua", "funext"]],
            "forbidden": [["uip", "ua"]],
            "homes": {"K": ["uip", "ua"]}}"#,
    );
    let out = lattc(&["lattice", "validate", "--lattice", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("home-legal"));

    // Unparseable config: exit 2.
    let junk = tmp_file("junk-lattice.json", "not json");
    let out = lattc(&["lattice", "validate", "--lattice", path_str(&junk)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lattice_env_var_is_a_fallback() {
    let custom = tmp_file(
        "env-lattice.json",
        r#"{"extensions": ["mine"], "aliases": {"M": ["mine"]}}"#,
    );
    let src = tmp_file("env-src.ltc", "def x :^M Nat := zero\n");
    let out = Command::new(env!("CARGO_BIN_EXE_lattc"))
        .args(["check", path_str(&src)])
        .env("LATTC_LATTICE", path_str(&custom))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("x :^M"));
    // The same file fails against the default lattice.
    let out = lattc(&["check", path_str(&src)]);
    assert_eq!(out.status.code(), Some(1));
}
