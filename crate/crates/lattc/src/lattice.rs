//! The configurable meet-semilattice of theories.
//!
//! A point of the lattice is a [`Level`]: a set of extension identifiers,
//! closed under the configured implication edges and containing no forbidden
//! pair. Levels are ordered by subset. Meets (intersections) always exist;
//! joins (closed unions) exist only when the union is legal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Deserialize;
use thiserror::Error;

/// The default theory lattice shipped with the binary.
///
/// `uip`, `funext`, `ua` and `cl` gate the built-in constants; `h` and `s`
/// are inert marker extensions so that source files can speak about a
/// low/high/super-high chain (`L < H < S`) of information-flow levels.
/// `{uip, ua}` is forbidden because a computational equality eliminator
/// contradicts univalence; `{cl, ua}` is forbidden because the shipped
/// excluded middle is informative (it returns a sum in `Type 0`).
pub const DEFAULT_CONFIG: &str = r#"{
  "extensions": ["uip", "funext", "ua", "cl", "h", "s"],
  "implies": [["ua", "funext"], ["s", "h"]],
  "forbidden": [["uip", "ua"], ["cl", "ua"]],
  "aliases": {"L": [], "H": ["h"], "S": ["h", "s"]},
  "homes": {"K": ["uip"], "em": ["cl"], "funext_ax": ["funext"], "ua_ax": ["ua"]}
}"#;

/// Name of one extension, e.g. `uip`. Matches `[a-z][a-z0-9_]*`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ExtensionId(String);

impl ExtensionId {
    pub fn new(name: &str) -> Result<Self, LatticeError> {
        if is_valid_extension_name(name) {
            Ok(ExtensionId(name.to_owned()))
        } else {
            Err(LatticeError::BadExtensionName {
                name: name.to_owned(),
            })
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ExtensionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_valid_extension_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// The built-in constants whose use is gated by a home level.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum GatedId {
    K,
    Em,
    FunextAx,
    UaAx,
}

impl GatedId {
    pub const ALL: [GatedId; 4] = [GatedId::K, GatedId::Em, GatedId::FunextAx, GatedId::UaAx];

    pub fn as_str(self) -> &'static str {
        match self {
            GatedId::K => "K",
            GatedId::Em => "em",
            GatedId::FunextAx => "funext_ax",
            GatedId::UaAx => "ua_ax",
        }
    }

    pub fn from_name(name: &str) -> Option<GatedId> {
        Self::ALL.into_iter().find(|g| g.as_str() == name)
    }
}

impl fmt::Display for GatedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A canonical, legal dependency level: an implication-closed set of
/// extensions with no forbidden pair. Construct via [`LatticeConfig`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level {
    members: Arc<BTreeSet<ExtensionId>>,
}

impl Level {
    /// The base theory: no extensions enabled. Always legal.
    pub fn bottom() -> Level {
        static EMPTY: OnceLock<Arc<BTreeSet<ExtensionId>>> = OnceLock::new();
        Level {
            members: EMPTY.get_or_init(|| Arc::new(BTreeSet::new())).clone(),
        }
    }

    pub fn members(&self) -> &BTreeSet<ExtensionId> {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Subset ordering.
    pub fn leq(&self, other: &Level) -> bool {
        self.members.is_subset(&other.members)
    }

    /// Strict subset; the "observer strictly below" test of the
    /// indistinguishability rules.
    pub fn lt(&self, other: &Level) -> bool {
        self.members.len() < other.members.len() && self.leq(other)
    }

    /// Plain set literal rendering, e.g. `{funext,ua}`. Alias-aware
    /// rendering lives in [`LatticeConfig::render_level`].
    pub fn literal(&self) -> String {
        let mut out = String::from("{");
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(m.as_str());
        }
        out.push('}');
        out
    }
}

impl fmt::Debug for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal())
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal())
    }
}

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("invalid configuration document: {0}")]
    Parse(String),
    #[error("invalid lattice configuration:\n{}", render_diagnostics(.0))]
    Config(Vec<Diagnostic>),
    #[error("unknown extension or level alias `{name}`")]
    UnknownExtension { name: String },
    #[error("extension name `{name}` is not of the form [a-z][a-z0-9_]*")]
    BadExtensionName { name: String },
    #[error("illegal level {members}: contains forbidden pair {{{first},{second}}}")]
    IllegalLevel {
        members: String,
        first: ExtensionId,
        second: ExtensionId,
    },
}

fn render_diagnostics(ds: &[Diagnostic]) -> String {
    ds.iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// One violated configuration invariant, naming the offending identifiers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub invariant: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.invariant, self.message)
    }
}

/// The configuration document as written, before validation.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub extensions: Vec<String>,
    #[serde(default)]
    pub implies: Vec<(String, String)>,
    #[serde(default)]
    pub forbidden: Vec<(String, String)>,
    #[serde(default)]
    pub aliases: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub homes: BTreeMap<String, Vec<String>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<RawConfig, LatticeError> {
        serde_json::from_str(text).map_err(|e| LatticeError::Parse(e.to_string()))
    }
}

/// A validated theory lattice.
#[derive(Debug, Clone)]
pub struct LatticeConfig {
    extensions: Vec<ExtensionId>,
    /// Per-extension implication closure, including the extension itself.
    closure: BTreeMap<ExtensionId, BTreeSet<ExtensionId>>,
    /// Forbidden pairs, stored with both orientations for cheap lookup.
    forbidden: Vec<(ExtensionId, ExtensionId)>,
    aliases: BTreeMap<String, Level>,
    /// Preferred alias per level (alphabetically first among exact matches).
    alias_of: BTreeMap<Level, String>,
    homes: BTreeMap<GatedId, Level>,
}

/// Check every `LatticeConfig` invariant on a raw document. An empty result
/// means the document seals into a valid [`LatticeConfig`].
pub fn validate(raw: &RawConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for name in &raw.extensions {
        if !is_valid_extension_name(name) {
            out.push(Diagnostic {
                invariant: "extension-name",
                message: format!("extension `{name}` is not of the form [a-z][a-z0-9_]*"),
            });
        }
        if !seen.insert(name.clone()) {
            out.push(Diagnostic {
                invariant: "extension-unique",
                message: format!("extension `{name}` is declared more than once"),
            });
        }
    }
    let declared: BTreeSet<&str> = raw.extensions.iter().map(|s| s.as_str()).collect();
    let check_ref = |field: &'static str, name: &str, out: &mut Vec<Diagnostic>| {
        if !declared.contains(name) {
            out.push(Diagnostic {
                invariant: "declared-ids",
                message: format!("{field} references undeclared extension `{name}`"),
            });
        }
    };
    for (a, b) in &raw.implies {
        check_ref("implies", a, &mut out);
        check_ref("implies", b, &mut out);
    }
    for (a, b) in &raw.forbidden {
        check_ref("forbidden", a, &mut out);
        check_ref("forbidden", b, &mut out);
    }
    if !out.is_empty() {
        // Later checks build on declared names; stop here.
        return out;
    }

    // Cycle detection on the implies graph, self-edges removed.
    let mut edges: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in &raw.implies {
        if a != b {
            edges.entry(a.as_str()).or_default().push(b.as_str());
        }
    }
    if let Some(cycle) = find_cycle(&declared, &edges) {
        out.push(Diagnostic {
            invariant: "implies-acyclic",
            message: format!("implication cycle through `{cycle}`"),
        });
        return out;
    }

    // Alias and home legality need a sealed closure table; build one.
    let sealed = seal_unchecked(raw);
    for (name, members) in &raw.aliases {
        if let Err(e) = sealed.canonicalize(members.iter().map(|s| s.as_str())) {
            out.push(Diagnostic {
                invariant: "alias-legal",
                message: format!("alias `{name}` does not denote a legal level: {e}"),
            });
        }
    }
    for (name, members) in &raw.homes {
        if GatedId::from_name(name).is_none() {
            out.push(Diagnostic {
                invariant: "home-construct",
                message: format!("`{name}` is not a gated construct"),
            });
        }
        if let Err(e) = sealed.canonicalize(members.iter().map(|s| s.as_str())) {
            out.push(Diagnostic {
                invariant: "home-legal",
                message: format!("home level of `{name}` is not a legal level: {e}"),
            });
        }
    }
    out
}

fn find_cycle<'a>(
    nodes: &BTreeSet<&'a str>,
    edges: &BTreeMap<&'a str, Vec<&'a str>>,
) -> Option<&'a str> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<&str, u8> = BTreeMap::new();
    fn visit<'a>(
        n: &'a str,
        edges: &BTreeMap<&'a str, Vec<&'a str>>,
        state: &mut BTreeMap<&'a str, u8>,
    ) -> Option<&'a str> {
        match state.get(n) {
            Some(1) => return Some(n),
            Some(2) => return None,
            _ => {}
        }
        state.insert(n, 1);
        if let Some(succs) = edges.get(n) {
            for s in succs {
                if let Some(c) = visit(s, edges, state) {
                    return Some(c);
                }
            }
        }
        state.insert(n, 2);
        None
    }
    for n in nodes {
        if let Some(c) = visit(n, edges, &mut state) {
            return Some(c);
        }
    }
    None
}

/// Build the closure table without validating aliases/homes. Only used once
/// declared-id and acyclicity checks have passed.
fn seal_unchecked(raw: &RawConfig) -> LatticeConfig {
    let extensions: Vec<ExtensionId> = raw
        .extensions
        .iter()
        .map(|s| ExtensionId(s.clone()))
        .collect();
    let mut closure: BTreeMap<ExtensionId, BTreeSet<ExtensionId>> = BTreeMap::new();
    for ext in &extensions {
        let mut set = BTreeSet::new();
        let mut stack = vec![ext.as_str().to_owned()];
        while let Some(cur) = stack.pop() {
            if !set.insert(ExtensionId(cur.clone())) {
                continue;
            }
            for (a, b) in &raw.implies {
                if *a == cur {
                    stack.push(b.clone());
                }
            }
        }
        closure.insert(ext.clone(), set);
    }
    let forbidden: Vec<(ExtensionId, ExtensionId)> = raw
        .forbidden
        .iter()
        .map(|(a, b)| (ExtensionId(a.clone()), ExtensionId(b.clone())))
        .collect();
    LatticeConfig {
        extensions,
        closure,
        forbidden,
        aliases: BTreeMap::new(),
        alias_of: BTreeMap::new(),
        homes: BTreeMap::new(),
    }
}

impl LatticeConfig {
    /// Parse and validate a configuration document.
    pub fn from_json(text: &str) -> Result<LatticeConfig, LatticeError> {
        let raw = RawConfig::parse(text)?;
        let diags = validate(&raw);
        if !diags.is_empty() {
            return Err(LatticeError::Config(diags));
        }
        let mut cfg = seal_unchecked(&raw);
        for (name, members) in &raw.aliases {
            let level = cfg.canonicalize(members.iter().map(|s| s.as_str()))?;
            cfg.aliases.insert(name.clone(), level);
        }
        for (name, level) in &cfg.aliases {
            // Alphabetically first alias wins as the preferred rendering.
            cfg.alias_of
                .entry(level.clone())
                .or_insert_with(|| name.clone());
        }
        for (name, members) in &raw.homes {
            let id = GatedId::from_name(name).expect("validated");
            let level = cfg.canonicalize(members.iter().map(|s| s.as_str()))?;
            cfg.homes.insert(id, level);
        }
        Ok(cfg)
    }

    /// The embedded default lattice.
    pub fn default_config() -> LatticeConfig {
        static CFG: OnceLock<LatticeConfig> = OnceLock::new();
        CFG.get_or_init(|| {
            LatticeConfig::from_json(DEFAULT_CONFIG).expect("embedded default config is valid")
        })
        .clone()
    }

    pub fn extensions(&self) -> &[ExtensionId] {
        &self.extensions
    }

    pub fn alias(&self, name: &str) -> Option<&Level> {
        self.aliases.get(name)
    }

    pub fn aliases(&self) -> &BTreeMap<String, Level> {
        &self.aliases
    }

    /// Home level of a gated construct, if the config assigns one.
    pub fn home(&self, id: GatedId) -> Option<&Level> {
        self.homes.get(&id)
    }

    fn first_forbidden_pair(
        &self,
        set: &BTreeSet<ExtensionId>,
    ) -> Option<(ExtensionId, ExtensionId)> {
        self.forbidden
            .iter()
            .find(|(a, b)| set.contains(a) && set.contains(b))
            .cloned()
    }

    /// Smallest implication-closed superset of `raw`; fails if the closure
    /// contains a forbidden pair or an undeclared extension.
    pub fn canonicalize<'a, I>(&self, raw: I) -> Result<Level, LatticeError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut set = BTreeSet::new();
        for name in raw {
            match self.closure.get(&ExtensionId(name.to_owned())) {
                Some(cl) => set.extend(cl.iter().cloned()),
                None => {
                    return Err(LatticeError::UnknownExtension {
                        name: name.to_owned(),
                    })
                }
            }
        }
        self.seal_closed(set)
    }

    /// Wrap an already-closed member set into a `Level`, checking legality.
    fn seal_closed(&self, set: BTreeSet<ExtensionId>) -> Result<Level, LatticeError> {
        if let Some((a, b)) = self.first_forbidden_pair(&set) {
            let members = Level {
                members: Arc::new(set),
            }
            .literal();
            return Err(LatticeError::IllegalLevel {
                members,
                first: a,
                second: b,
            });
        }
        Ok(Level {
            members: Arc::new(set),
        })
    }

    /// Subset test. Inputs are canonical by construction.
    pub fn leq(&self, l0: &Level, l1: &Level) -> bool {
        l0.leq(l1)
    }

    /// Greatest lower bound: set intersection. Always defined; an
    /// intersection of closed sets is closed and legality is downward closed.
    pub fn meet(&self, l0: &Level, l1: &Level) -> Level {
        let set: BTreeSet<ExtensionId> = l0.members.intersection(&l1.members).cloned().collect();
        Level {
            members: Arc::new(set),
        }
    }

    /// Least upper bound: the union when legal, `None` otherwise. A union of
    /// closed sets is closed, and any upper bound contains the union, so an
    /// illegal union means no upper bound exists at all.
    pub fn join(&self, l0: &Level, l1: &Level) -> Option<Level> {
        let set: BTreeSet<ExtensionId> = l0.members.union(&l1.members).cloned().collect();
        self.seal_closed(set).ok()
    }

    /// Render a level, preferring a configured alias over the set literal.
    pub fn render_level(&self, level: &Level) -> String {
        match self.alias_of.get(level) {
            Some(alias) => alias.clone(),
            None => level.literal(),
        }
    }

    /// Enumerate every legal level, ordered by (size, members).
    pub fn legal_levels(&self) -> Vec<Level> {
        let exts = &self.extensions;
        let n = exts.len();
        assert!(
            n <= 20,
            "legal_levels is exponential in the extension count"
        );
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for mask in 0u32..(1u32 << n) {
            let raw = exts
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, e)| e.as_str());
            if let Ok(level) = self.canonicalize(raw) {
                if seen.insert(level.clone()) {
                    out.push(level);
                }
            }
        }
        out.sort_by(|a, b| (a.members.len(), a.members()).cmp(&(b.members.len(), b.members())));
        out
    }
}

/// Parse, validate and seal a configuration document. The public entry point
/// used by the CLI and the resolver.
pub fn load_config(text: &str) -> Result<LatticeConfig, LatticeError> {
    LatticeConfig::from_json(text)
}
