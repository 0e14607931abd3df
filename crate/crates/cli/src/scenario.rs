//! Scenario files: a line-oriented sectioned text format, or the same data as JSON.
//!
//! ```text
//! file     := line*
//! line     := blank | comment | header | entry
//! comment  := "#" any*                      (also allowed after an entry)
//! header   := "[" section "]"
//! entry    := key "=" value
//! section  := statement | structure | sets | function | covering | sumset
//!           | target | pair | distribution | polynomial | compression | search | run
//! ```
//!
//! Each section appears at most once. Keys are checked against the section,
//! and only `point`, `atom`, `g`, `fbar` and `factor` may repeat. Lists are
//! whitespace or comma separated; subsets are written `{1,3}` (1-based).

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use partdet::search::{CoveringChoice, SearchMode, SearchScenario, StatementId, Structures, DEFAULT_SEARCH_BUDGET};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    /// Built-in group name such as `Z6`, `D4`, `Q8`, `Z2xZ4`.
    Group(String),
    /// `Z<n>`, `M2(Z2)` or `M2(Z3)`.
    Ring(String),
    /// Path to a Cayley table file: the order on the first line, then one row per line.
    Table(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Function {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Covering {
    /// Family literal, e.g. `{1,2} {2,3} {1,3}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    /// Rational weights, one per member (or per pair for weighted statements).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
    /// `singletons`, `pairs`, `leave-one-out`, `regular`, `degree` or `lp`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub tuple: Vec<usize>,
    pub p: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FbarPart {
    pub mask: String,
    pub poly: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polynomial {
    #[serde(default, rename = "F", skip_serializing_if = "Option::is_none")]
    pub big_f: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub g: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fbar: Vec<FbarPart>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pair {
    pub s: String,
    pub t: String,
}

/// Everything a scenario may carry. Which parts are needed depends on the statement.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statement: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<Structure>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<Function>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covering: Option<Covering>,
    #[serde(default, rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<usize>>,
    #[serde(default, rename = "D", skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<usize>>,
    #[serde(default, rename = "Y", skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<Pair>,
    /// One list of `(element, probability)` per coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marginals: Option<Vec<Vec<(usize, String)>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<Atom>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<Polynomial>,
    /// Compression target family; defaults to the minimal multiset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compression: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchScenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("statement", &["id"]),
    ("structure", &["group", "ring", "table"]),
    ("sets", &[]),
    ("function", &["kind", "coeffs", "labels"]),
    ("covering", &["family", "weights", "preset"]),
    ("sumset", &["A", "D"]),
    ("target", &["Y", "point"]),
    ("pair", &["s", "t"]),
    ("distribution", &["atom"]),
    ("polynomial", &["F", "g", "fbar", "factor"]),
    ("compression", &["target"]),
    (
        "search",
        &[
            "statement",
            "groups",
            "min_order",
            "max_order",
            "abelian",
            "k",
            "min_size",
            "max_size",
            "trials",
            "exhaustive",
            "alphabet",
            "restrict_y",
            "covering",
            "budget",
        ],
    ),
    ("run", &["seed"]),
];

const REPEATABLE: &[&str] = &["point", "atom", "g", "fbar", "factor"];

/// Reads a scenario file, choosing JSON when the first non-blank character is `{`.
pub fn load(path: &Path) -> Result<Scenario, ParseError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ParseError { line: 0, message: format!("cannot read {}: {e}", path.display()) })?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Scenario, ParseError> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_text(text)
    }
}

pub fn parse_json(text: &str) -> Result<Scenario, ParseError> {
    serde_json::from_str(text).map_err(|e| ParseError { line: e.line(), message: e.to_string() })
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, message: message.into() })
}

fn ints<T: std::str::FromStr>(line: usize, value: &str) -> Result<Vec<T>, ParseError> {
    value
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().or_else(|_| err(line, format!("`{t}` is not an integer"))))
        .collect()
}

fn one<T: std::str::FromStr>(line: usize, value: &str) -> Result<T, ParseError> {
    value.parse().or_else(|_| err(line, format!("`{value}` is not a valid number")))
}

fn flag(line: usize, value: &str) -> Result<bool, ParseError> {
    match value {
        "true" | "yes" => Ok(true),
        "false" | "no" => Ok(false),
        _ => err(line, format!("`{value}` is not true or false")),
    }
}

fn words(value: &str) -> Vec<String> {
    value.split_whitespace().map(str::to_string).collect()
}

/// Index in `X<i>` keys, 1-based.
fn indexed_key(line: usize, key: &str, prefix: char) -> Result<usize, ParseError> {
    key.strip_prefix(prefix)
        .and_then(|n| n.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .map_or_else(|| err(line, format!("expected key `{prefix}<i>`, found `{key}`")), Ok)
}

#[derive(Default)]
struct SearchKeys {
    statement: Option<(usize, String)>,
    groups: Option<Vec<String>>,
    min_order: Option<usize>,
    max_order: Option<usize>,
    abelian: Option<bool>,
    k: Option<usize>,
    min_size: Option<usize>,
    max_size: Option<usize>,
    trials: Option<usize>,
    exhaustive: Option<bool>,
    alphabet: Option<usize>,
    restrict_y: Option<bool>,
    covering: Option<CoveringChoice>,
    budget: Option<usize>,
    header_line: usize,
}

impl SearchKeys {
    fn build(self, seed: u64) -> Result<SearchScenario, ParseError> {
        let line = self.header_line;
        let (sline, name) = self.statement.map_or_else(|| err(line, "[search] needs `statement`"), Ok)?;
        let statement =
            StatementId::parse(&name).map_or_else(|| err(sline, format!("unknown search statement `{name}`")), Ok)?;
        let structures = match self.groups {
            Some(names) => {
                if self.min_order.is_some() || self.max_order.is_some() || self.abelian.is_some() {
                    return err(line, "`groups` cannot be combined with catalog filters");
                }
                Structures::Named(names)
            }
            None => Structures::Catalog {
                min_order: self.min_order.unwrap_or(1),
                max_order: self.max_order.unwrap_or(16),
                abelian: self.abelian,
            },
        };
        let mode = match (self.trials, self.exhaustive.unwrap_or(false)) {
            (Some(_), true) => return err(line, "`trials` and `exhaustive = true` are exclusive"),
            (Some(trials), false) => SearchMode::Random { trials },
            (None, true) => SearchMode::Exhaustive,
            (None, false) => return err(line, "[search] needs `trials` or `exhaustive = true`"),
        };
        Ok(SearchScenario {
            statement,
            structures,
            k: self.k.map_or_else(|| err(line, "[search] needs `k`"), Ok)?,
            min_size: self.min_size.unwrap_or(1),
            max_size: self.max_size.map_or_else(|| err(line, "[search] needs `max_size`"), Ok)?,
            mode,
            seed,
            budget: self.budget.unwrap_or(DEFAULT_SEARCH_BUDGET),
            alphabet: self.alphabet.unwrap_or(2),
            restrict_y: self.restrict_y.unwrap_or(false),
            covering: self.covering,
        })
    }
}

pub fn parse_text(text: &str) -> Result<Scenario, ParseError> {
    let mut sc = Scenario::default();
    let mut seen_sections = BTreeSet::new();
    let mut seen_keys = BTreeSet::new();
    let mut section: Option<(&str, &[&str])> = None;
    let mut sets: Vec<Option<Vec<usize>>> = Vec::new();
    let mut marginals: Vec<Option<Vec<(usize, String)>>> = Vec::new();
    let mut search: Option<SearchKeys> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name.strip_suffix(']').map_or_else(|| err(line, "unterminated section header"), Ok)?.trim();
            let entry = SECTIONS
                .iter()
                .find(|(s, _)| *s == name)
                .map_or_else(|| err(line, format!("unknown section [{name}]")), Ok)?;
            if !seen_sections.insert(name) {
                return err(line, format!("section [{name}] appears twice"));
            }
            if name == "search" {
                search = Some(SearchKeys { header_line: line, ..Default::default() });
            }
            section = Some((entry.0, entry.1));
            continue;
        }
        let (sname, keys) = section.map_or_else(|| err(line, "entry before any section header"), Ok)?;
        let (key, value) = content.split_once('=').map_or_else(|| err(line, "expected `key = value`"), Ok)?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return err(line, "empty key");
        }
        let per_coordinate = matches!(sname, "sets" | "distribution") && key.starts_with('X');
        if !per_coordinate && !keys.contains(&key) {
            return err(line, format!("unknown key `{key}` in [{sname}]"));
        }
        if !REPEATABLE.contains(&key) && !seen_keys.insert((sname, key.to_string())) {
            return err(line, format!("duplicate key `{key}` in [{sname}]"));
        }
        if value.is_empty() {
            return err(line, format!("`{key}` has no value"));
        }

        match (sname, key) {
            ("statement", _) => sc.statement = Some(value.to_string()),
            ("structure", _) => {
                if sc.structure.is_some() {
                    return err(line, "[structure] takes exactly one of group, ring, table");
                }
                sc.structure = Some(match key {
                    "group" => Structure::Group(value.to_string()),
                    "ring" => Structure::Ring(value.to_string()),
                    _ => Structure::Table(value.to_string()),
                });
            }
            ("sets", _) => {
                let i = indexed_key(line, key, 'X')?;
                if sets.len() < i {
                    sets.resize(i, None);
                }
                sets[i - 1] = Some(ints(line, value)?);
            }
            ("function", "kind") => {
                sc.function.get_or_insert_with(empty_function).kind = value.to_string();
            }
            ("function", "coeffs") => sc.function.get_or_insert_with(empty_function).coeffs = Some(ints(line, value)?),
            ("function", _) => sc.function.get_or_insert_with(empty_function).labels = Some(ints(line, value)?),
            ("covering", "family") => sc.covering.get_or_insert_with(Default::default).family = Some(value.to_string()),
            ("covering", "weights") => sc.covering.get_or_insert_with(Default::default).weights = Some(words(value)),
            ("covering", _) => sc.covering.get_or_insert_with(Default::default).preset = Some(value.to_string()),
            ("sumset", "A") => sc.a = Some(ints(line, value)?),
            ("sumset", _) => sc.d = Some(ints(line, value)?),
            ("target", "Y") => sc.y = Some(ints(line, value)?),
            ("target", _) => sc.points.get_or_insert_with(Vec::new).push(ints(line, value)?),
            ("pair", "s") => sc.pair.get_or_insert_with(empty_pair).s = value.to_string(),
            ("pair", _) => sc.pair.get_or_insert_with(empty_pair).t = value.to_string(),
            ("distribution", "atom") => {
                let (tuple, p) = value.split_once(':').map_or_else(|| err(line, "expected `atom = x1 x2 .. : p`"), Ok)?;
                sc.atoms.get_or_insert_with(Vec::new).push(Atom { tuple: ints(line, tuple)?, p: p.trim().to_string() });
            }
            ("distribution", _) => {
                let i = indexed_key(line, key, 'X')?;
                let mut masses = Vec::new();
                for tok in value.split_whitespace() {
                    let (e, p) = tok.split_once(':').map_or_else(|| err(line, format!("expected `e:p`, found `{tok}`")), Ok)?;
                    masses.push((one(line, e)?, p.to_string()));
                }
                if marginals.len() < i {
                    marginals.resize(i, None);
                }
                marginals[i - 1] = Some(masses);
            }
            ("polynomial", "F") => sc.polynomial.get_or_insert_with(Default::default).big_f = Some(value.to_string()),
            ("polynomial", "g") => sc.polynomial.get_or_insert_with(Default::default).g.push(value.to_string()),
            ("polynomial", "factor") => {
                sc.polynomial.get_or_insert_with(Default::default).factors.push(value.to_string())
            }
            ("polynomial", _) => {
                let (mask, poly) = value
                    .split_once(':')
                    .map_or_else(|| err(line, "expected `fbar = {i,..} : polynomial`"), Ok)?;
                sc.polynomial
                    .get_or_insert_with(Default::default)
                    .fbar
                    .push(FbarPart { mask: mask.trim().to_string(), poly: poly.trim().to_string() });
            }
            ("compression", _) => sc.compression = Some(value.to_string()),
            ("run", _) => sc.seed = Some(one(line, value)?),
            ("search", _) => {
                let s = search.as_mut().expect("header seen");
                match key {
                    "statement" => s.statement = Some((line, value.to_string())),
                    "groups" => s.groups = Some(words(value)),
                    "min_order" => s.min_order = Some(one(line, value)?),
                    "max_order" => s.max_order = Some(one(line, value)?),
                    "abelian" => s.abelian = Some(flag(line, value)?),
                    "k" => s.k = Some(one(line, value)?),
                    "min_size" => s.min_size = Some(one(line, value)?),
                    "max_size" => s.max_size = Some(one(line, value)?),
                    "trials" => s.trials = Some(one(line, value)?),
                    "exhaustive" => s.exhaustive = Some(flag(line, value)?),
                    "alphabet" => s.alphabet = Some(one(line, value)?),
                    "restrict_y" => s.restrict_y = Some(flag(line, value)?),
                    "budget" => s.budget = Some(one(line, value)?),
                    _ => {
                        s.covering = Some(
                            CoveringChoice::parse(value)
                                .map_or_else(|| err(line, format!("unknown covering `{value}`")), Ok)?,
                        )
                    }
                }
            }
            _ => unreachable!("keys checked against the section table"),
        }
    }

    sc.sets = collect_dense(sets, "sets", "X")?;
    if !marginals.is_empty() {
        sc.marginals = Some(collect_dense(marginals, "distribution", "X")?);
    }
    if let Some(p) = &sc.pair {
        if p.s.is_empty() || p.t.is_empty() {
            return err(0, "[pair] needs both `s` and `t`");
        }
    }
    if let Some(f) = &sc.function {
        if f.kind.is_empty() {
            return err(0, "[function] needs `kind`");
        }
    }
    if let Some(keys) = search {
        sc.search = Some(keys.build(sc.seed.unwrap_or(0))?);
    }
    Ok(sc)
}

fn empty_function() -> Function {
    Function { kind: String::new(), coeffs: None, labels: None }
}

fn empty_pair() -> Pair {
    Pair { s: String::new(), t: String::new() }
}

fn collect_dense<T>(items: Vec<Option<T>>, section: &str, prefix: &str) -> Result<Vec<T>, ParseError> {
    items
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.map_or_else(|| err(0, format!("[{section}] is missing {prefix}{}", i + 1)), Ok))
        .collect()
}
