//! Experiment configuration, read from a TOML file.
//!
//! ```toml
//! name = "toy"                 # run id written into observables.csv
//! grammar = "toy.cfg"          # relative to this file
//! sentence = "NP V NP"
//! max_macro_steps = 6
//! output_dir = "out"
//!
//! [tolerances]
//! na_oracle = 1e-9             # per coordinate, NA against the exact orbit
//! invariance = 0.0             # max |Δ| for an invariant verdict
//!
//! [observables]
//! step_window = [2, 3]         # (stack cells l, input cells r)
//! seed = 7
//! mode = "product"             # or "joint"
//! amari = true
//! harmony = true
//! dissimilarity = true
//!
//! [[encoding]]
//! name = "gamma"
//! input = { NP = 1, V = 2 }
//! stack = { NP = 1, V = 2, VP = 3, S = 4 }
//!
//! [check]
//! suites = ["ultrametric", "orbits", "group-action", "partition",
//!           "commutation", "network", "invariance"]
//! random_machines = 10
//! tapes_per_machine = 100
//! seed = 1
//! interval_extensions = 10000
//! # fault = { encoding = "gamma", cell = [1, 1] }
//! ```
//!
//! The blank `⊔` may be listed with digit 0 or left out, in which case it is
//! pinned to 0. Any other digit for the blank is rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::nda::Orderings;
use crate::patterns::PartitionMode;
use crate::shift::{Cfg, VersatileShift};
use crate::symbols::{SymbolOrdering, Word};

fn default_name() -> String {
    "experiment".into()
}
fn default_macro_steps() -> usize {
    6
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_na_oracle() -> f64 {
    1e-9
}
fn default_window() -> [usize; 2] {
    [2, 3]
}
fn default_seed() -> u64 {
    7
}
fn default_mode() -> String {
    "product".into()
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_na_oracle")]
    pub na_oracle: f64,
    #[serde(default)]
    pub invariance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            na_oracle: default_na_oracle(),
            invariance: 0.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ObservableConfig {
    #[serde(default = "default_window")]
    pub step_window: [usize; 2],
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "yes")]
    pub amari: bool,
    #[serde(default = "yes")]
    pub harmony: bool,
    #[serde(default = "yes")]
    pub dissimilarity: bool,
}

impl Default for ObservableConfig {
    fn default() -> Self {
        ObservableConfig {
            step_window: default_window(),
            seed: default_seed(),
            mode: default_mode(),
            amari: true,
            harmony: true,
            dissimilarity: true,
        }
    }
}

impl ObservableConfig {
    pub fn partition_mode(&self) -> Result<PartitionMode> {
        self.mode.parse().map_err(|e: Error| Error::Config(e.to_string()))
    }
}

/// A named pair of symbol tables.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EncodingConfig {
    pub name: String,
    pub input: BTreeMap<String, usize>,
    pub stack: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FaultConfig {
    pub encoding: String,
    /// `[i, j]`: input strip, stack strip.
    pub cell: [usize; 2],
}

pub const ALL_SUITES: [&str; 7] = [
    "ultrametric",
    "orbits",
    "group-action",
    "partition",
    "commutation",
    "network",
    "invariance",
];

fn all_suites() -> Vec<String> {
    ALL_SUITES.iter().map(|s| s.to_string()).collect()
}
fn default_machines() -> usize {
    10
}
fn default_tapes() -> usize {
    100
}
fn default_check_seed() -> u64 {
    1
}
fn default_interval_extensions() -> usize {
    10_000
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    #[serde(default = "all_suites")]
    pub suites: Vec<String>,
    #[serde(default = "default_machines")]
    pub random_machines: usize,
    #[serde(default = "default_tapes")]
    pub tapes_per_machine: usize,
    #[serde(default = "default_check_seed")]
    pub seed: u64,
    #[serde(default = "default_interval_extensions")]
    pub interval_extensions: usize,
    #[serde(default)]
    pub fault: Option<FaultConfig>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            suites: all_suites(),
            random_machines: default_machines(),
            tapes_per_machine: default_tapes(),
            seed: default_check_seed(),
            interval_extensions: default_interval_extensions(),
            fault: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_name")]
    name: String,
    grammar: PathBuf,
    #[serde(default)]
    sentence: String,
    #[serde(default = "default_macro_steps")]
    max_macro_steps: usize,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    observables: ObservableConfig,
    #[serde(default)]
    encoding: Vec<EncodingConfig>,
    #[serde(default)]
    check: CheckConfig,
}

/// A validated experiment: grammar loaded, machine compiled, every encoding
/// checked against the machine's alphabets.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub name: String,
    pub grammar_path: PathBuf,
    pub grammar: Cfg,
    pub machine: VersatileShift,
    pub sentence: Word,
    pub max_macro_steps: usize,
    pub output_dir: PathBuf,
    pub tolerances: Tolerances,
    pub observables: ObservableConfig,
    pub encodings: Vec<(String, Orderings)>,
    pub check: CheckConfig,
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl ExperimentConfig {
    /// Reads `path`; the grammar and output paths are taken relative to its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(config_err)?;
        let grammar_path = base_dir.join(&raw.grammar);
        let grammar_text = std::fs::read_to_string(&grammar_path)
            .map_err(|e| Error::Config(format!("grammar {}: {e}", grammar_path.display())))?;
        let grammar = Cfg::parse(&grammar_text)?;
        Self::assemble(raw, grammar_path, grammar, base_dir)
    }

    /// Same as [`from_toml`](Self::from_toml) with the grammar given inline
    /// (the `grammar` key is then only recorded).
    pub fn from_toml_with_grammar(text: &str, grammar_text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(config_err)?;
        let grammar = Cfg::parse(grammar_text)?;
        let grammar_path = base_dir.join(&raw.grammar);
        Self::assemble(raw, grammar_path, grammar, base_dir)
    }

    fn assemble(raw: RawConfig, grammar_path: PathBuf, grammar: Cfg, base_dir: &Path) -> Result<Self> {
        let machine = crate::shift::compile_cfg_topdown(&grammar)?;
        if raw.encoding.is_empty() {
            return Err(config_err("at least one [[encoding]] is required"));
        }
        let [l, r] = raw.observables.step_window;
        if l < 1 || r < 1 {
            return Err(config_err(format!("step_window lengths must be >= 1, got [{l}, {r}]")));
        }
        raw.observables.partition_mode()?;
        if raw.max_macro_steps == 0 {
            return Err(config_err("max_macro_steps must be >= 1"));
        }
        for (what, t) in [("na_oracle", raw.tolerances.na_oracle), ("invariance", raw.tolerances.invariance)] {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(config_err(format!("tolerance {what} must be a finite non-negative number")));
            }
        }
        let sentence = Word::parse(&raw.sentence);
        if let Some(bad) = sentence.iter().find(|s| !grammar.is_terminal(s)) {
            return Err(config_err(format!("sentence symbol `{bad}` is not a terminal of the grammar")));
        }
        let mut encodings: Vec<(String, Orderings)> = Vec::new();
        for e in &raw.encoding {
            if encodings.iter().any(|(n, _)| *n == e.name) {
                return Err(config_err(format!("encoding `{}` is defined twice", e.name)));
            }
            let side = |table: &BTreeMap<String, usize>, alpha, side: &str| {
                SymbolOrdering::pinned(alpha, table.iter().map(|(k, v)| (k.as_str(), *v)))
                    .map_err(|err| config_err(format!("encoding `{}`, {side} table: {err}", e.name)))
            };
            let input = side(&e.input, machine.input_alphabet(), "input")?;
            let stack = side(&e.stack, machine.stack_alphabet(), "stack")?;
            encodings.push((e.name.clone(), Orderings::new(input, stack).map_err(config_err)?));
        }
        for s in &raw.check.suites {
            if !ALL_SUITES.contains(&s.as_str()) {
                return Err(config_err(format!(
                    "unknown check suite `{s}` (known: {})",
                    ALL_SUITES.join(", ")
                )));
            }
        }
        if let Some(f) = &raw.check.fault {
            if !encodings.iter().any(|(n, _)| *n == f.encoding) {
                return Err(config_err(format!("fault names unknown encoding `{}`", f.encoding)));
            }
        }
        Ok(ExperimentConfig {
            name: raw.name,
            grammar_path,
            grammar,
            machine,
            sentence,
            max_macro_steps: raw.max_macro_steps,
            output_dir: base_dir.join(raw.output_dir),
            tolerances: raw.tolerances,
            observables: raw.observables,
            encodings,
            check: raw.check,
        })
    }

    pub fn encoding(&self, name: &str) -> Option<&Orderings> {
        self.encodings.iter().find(|(n, _)| n == name).map(|(_, o)| o)
    }
}
