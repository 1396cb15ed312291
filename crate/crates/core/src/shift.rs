//! Versatile shifts, the grammar-to-recognizer compiler, and run traces.
//!
//! A rule looks at a window of the tape around the dot (the domain of
//! dependence), swaps the matched dotted word for a new one and then shifts
//! the dot. The compiled top-down recognizer only uses zero shifts, but the
//! general shift is supported.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;

use crate::error::{domain, Error, Result};
use crate::symbols::{Alphabet, DottedSequence, Symbol, Word};

/// Domain of dependence: how many stack (`l`) and input (`r`) symbols a
/// machine inspects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dod {
    pub l: usize,
    pub r: usize,
}

impl Dod {
    pub fn new(l: usize, r: usize) -> Result<Self> {
        if l + r == 0 {
            return Err(domain("domain of dependence must inspect at least one symbol"));
        }
        Ok(Dod { l, r })
    }
}

/// One position of a rule pattern or template.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Sym(Symbol),
    /// The rule's wildcard; it ranges over non-blank input symbols.
    Var,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Sym(s) => write!(f, "{s}"),
            Slot::Var => f.write_str("$a"),
        }
    }
}

fn parse_slots(text: &str) -> Vec<Slot> {
    text.split_whitespace()
        .filter(|t| *t != "ε")
        .map(|t| {
            if t.starts_with('$') {
                Slot::Var
            } else {
                Slot::Sym(Symbol::new(t))
            }
        })
        .collect()
}

/// What a rule does, for trace labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RuleLabel {
    /// Expansion by a grammar rule, e.g. `S -> NP VP`.
    Predict(String),
    /// Cancelling a predicted terminal against the input.
    Attach,
    Named(String),
}

/// A dot-local rewrite followed by a shift.
///
/// Stack-side slots are stored top first (nearest the dot first).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VsRule {
    pub label: RuleLabel,
    pub stack_match: Vec<Slot>,
    pub input_match: Vec<Slot>,
    pub stack_replace: Vec<Slot>,
    pub input_replace: Vec<Slot>,
    pub shift: i64,
}

impl VsRule {
    /// Parses both sides in tape order, e.g. `"S . $a"` and `"VP NP . $a"`.
    /// Tokens starting with `$` are the wildcard; `ε` marks an empty side.
    pub fn parse(label: RuleLabel, pattern: &str, replacement: &str, shift: i64) -> Result<Self> {
        let split = |text: &str| -> Result<(Vec<Slot>, Vec<Slot>)> {
            let (left, right) = text
                .split_once(" . ")
                .or_else(|| text.strip_prefix(". ").map(|r| ("", r)))
                .or_else(|| text.strip_suffix(" .").map(|l| (l, "")))
                .ok_or_else(|| domain(format!("rule side `{text}` has no ` . `")))?;
            let mut stack = parse_slots(left);
            stack.reverse();
            Ok((stack, parse_slots(right)))
        };
        let (stack_match, input_match) = split(pattern)?;
        let (stack_replace, input_replace) = split(replacement)?;
        let rule = VsRule {
            label,
            stack_match,
            input_match,
            stack_replace,
            input_replace,
            shift,
        };
        rule.check_vars()?;
        Ok(rule)
    }

    fn check_vars(&self) -> Result<()> {
        let bound = self.stack_match.iter().chain(&self.input_match).any(|s| *s == Slot::Var);
        let used = self.stack_replace.iter().chain(&self.input_replace).any(|s| *s == Slot::Var);
        if used && !bound {
            return Err(Error::MachineConstruction(format!(
                "rule `{self}` uses the wildcard without binding it"
            )));
        }
        Ok(())
    }

    /// Matches the padded window (top-first stack, input). Returns the
    /// wildcard binding on success (`None` if the rule has no wildcard).
    fn matches(&self, stack: &[Symbol], input: &[Symbol]) -> Option<Option<Symbol>> {
        let mut binding: Option<Symbol> = None;
        let pairs = self
            .stack_match
            .iter()
            .zip(stack)
            .chain(self.input_match.iter().zip(input));
        for (slot, sym) in pairs {
            match slot {
                Slot::Sym(s) if s == sym => {}
                Slot::Sym(_) => return None,
                Slot::Var => {
                    if sym.is_blank() {
                        return None;
                    }
                    match &binding {
                        Some(b) if b != sym => return None,
                        Some(_) => {}
                        None => binding = Some(sym.clone()),
                    }
                }
            }
        }
        Some(binding)
    }

    /// The operation label this rule produces in a trace.
    pub fn label_text(&self) -> String {
        self.operation().to_string()
    }

    fn operation(&self) -> Operation {
        match &self.label {
            RuleLabel::Predict(g) => Operation::Predict(g.clone()),
            RuleLabel::Attach => Operation::Attach,
            RuleLabel::Named(n) => Operation::Apply(n.clone()),
        }
    }

    fn side(slots: &[Slot]) -> Word {
        slots
            .iter()
            .map(|s| match s {
                Slot::Sym(s) => s.clone(),
                Slot::Var => Symbol::new("$a"),
            })
            .collect()
    }
}

impl fmt::Display for VsRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let stack = |slots: &[Slot]| Self::side(slots).reversed();
        write!(
            f,
            "{} . {} ↦ {} . {}",
            stack(&self.stack_match),
            Self::side(&self.input_match),
            stack(&self.stack_replace),
            Self::side(&self.input_replace)
        )?;
        if self.shift != 0 {
            write!(f, " (shift {})", self.shift)?;
        }
        Ok(())
    }
}

/// Label attached to each row of a run trace.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Operation {
    Predict(String),
    Attach,
    Apply(String),
    Accept,
    HaltReject,
    StepLimit,
}

impl Operation {
    pub fn is_terminal(&self) -> bool {
        matches!(self, Operation::Accept | Operation::HaltReject | Operation::StepLimit)
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operation::Predict(rule) => write!(f, "predict({rule})"),
            Operation::Attach => f.write_str("attach"),
            Operation::Apply(name) => write!(f, "rule({name})"),
            Operation::Accept => f.write_str("accept"),
            Operation::HaltReject => f.write_str("halt-reject"),
            Operation::StepLimit => f.write_str("step-limit"),
        }
    }
}

/// A deterministic versatile shift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VersatileShift {
    stack_alphabet: Alphabet,
    input_alphabet: Alphabet,
    dod: Dod,
    rules: Vec<VsRule>,
}

/// Windows beyond this count are not enumerated for the determinism check.
const MAX_CHECKED_WINDOWS: usize = 1 << 20;

impl VersatileShift {
    /// Builds a machine, rejecting rules that do not fit the window or that
    /// overlap on some window.
    pub fn new(
        stack_alphabet: Alphabet,
        input_alphabet: Alphabet,
        dod: Dod,
        rules: Vec<VsRule>,
    ) -> Result<Self> {
        for alpha in [&stack_alphabet, &input_alphabet] {
            if !alpha.has_blank() {
                return Err(Error::MachineConstruction(
                    "machine alphabets must include the blank".into(),
                ));
            }
        }
        for rule in &rules {
            rule.check_vars()?;
            if rule.stack_match.len() > dod.l || rule.input_match.len() > dod.r {
                return Err(Error::MachineConstruction(format!(
                    "rule `{rule}` does not fit the domain of dependence ({}, {})",
                    dod.l, dod.r
                )));
            }
            let stack_syms = rule.stack_match.iter().chain(&rule.stack_replace);
            let input_syms = rule.input_match.iter().chain(&rule.input_replace);
            for (slot, alpha) in stack_syms
                .map(|s| (s, &stack_alphabet))
                .chain(input_syms.map(|s| (s, &input_alphabet)))
            {
                if let Slot::Sym(s) = slot {
                    if !alpha.contains(s) {
                        return Err(Error::MachineConstruction(format!(
                            "rule `{rule}` uses `{s}` outside its side's alphabet"
                        )));
                    }
                }
            }
        }
        let vs = VersatileShift {
            stack_alphabet,
            input_alphabet,
            dod,
            rules,
        };
        vs.check_determinism()?;
        Ok(vs)
    }

    fn check_determinism(&self) -> Result<()> {
        let windows = self
            .stack_alphabet
            .size()
            .checked_pow(self.dod.l as u32)
            .and_then(|a| a.checked_mul(self.input_alphabet.size().checked_pow(self.dod.r as u32)?));
        if windows.is_none_or(|w| w > MAX_CHECKED_WINDOWS) {
            return Ok(());
        }
        for (stack, input) in self.windows() {
            let hits: Vec<&VsRule> = self
                .rules
                .iter()
                .filter(|r| r.matches(&stack, &input).is_some())
                .collect();
            if hits.len() > 1 {
                return Err(Error::MachineConstruction(format!(
                    "rules {} all match window {} . {}",
                    hits.iter().map(|r| format!("`{r}`")).join(", "),
                    Word::new(stack.clone()).reversed(),
                    Word::new(input.clone()),
                )));
            }
        }
        Ok(())
    }

    /// Every (top-first stack, input) window of the domain of dependence.
    pub fn windows(&self) -> impl Iterator<Item = (Vec<Symbol>, Vec<Symbol>)> + '_ {
        let stacks: Vec<Vec<Symbol>> = itertools::repeat_n(self.stack_alphabet.symbols().iter().cloned(), self.dod.l)
            .multi_cartesian_product()
            .collect();
        let inputs: Vec<Vec<Symbol>> = itertools::repeat_n(self.input_alphabet.symbols().iter().cloned(), self.dod.r)
            .multi_cartesian_product()
            .collect();
        stacks.into_iter().cartesian_product(inputs)
    }

    pub fn stack_alphabet(&self) -> &Alphabet {
        &self.stack_alphabet
    }

    pub fn input_alphabet(&self) -> &Alphabet {
        &self.input_alphabet
    }

    pub fn dod(&self) -> Dod {
        self.dod
    }

    pub fn rules(&self) -> &[VsRule] {
        &self.rules
    }

    fn window_of(&self, s: &DottedSequence) -> (Vec<Symbol>, Vec<Symbol>) {
        (
            (0..self.dod.l).map(|k| s.stack_at(k)).collect(),
            (0..self.dod.r).map(|k| s.input_at(k)).collect(),
        )
    }

    /// Index of the rule that fires on `s`, if any.
    pub fn matching_rule(&self, s: &DottedSequence) -> Option<usize> {
        let (stack, input) = self.window_of(s);
        self.rules
            .iter()
            .position(|r| r.matches(&stack, &input).is_some())
    }

    fn check_tape(&self, s: &DottedSequence) -> Result<()> {
        for (side, alpha) in [(s.stack(), &self.stack_alphabet), (s.input(), &self.input_alphabet)] {
            if let Some(sym) = side.iter().find(|x| !alpha.contains(x)) {
                return Err(domain(format!("tape symbol `{sym}` is not in the machine alphabet")));
            }
        }
        Ok(())
    }
}

fn instantiate(slots: &[Slot], binding: &Option<Symbol>) -> Vec<Symbol> {
    slots
        .iter()
        .map(|s| match s {
            Slot::Sym(x) => x.clone(),
            Slot::Var => binding.clone().expect("wildcard bound by the match"),
        })
        .collect()
}

/// One application of the machine map. When no rule matches, the state is
/// returned unchanged and labelled `accept` (blank tape) or `halt-reject`.
pub fn vs_step(vs: &VersatileShift, s: &DottedSequence) -> Result<(DottedSequence, Operation)> {
    vs.check_tape(s)?;
    let (stack_win, input_win) = vs.window_of(s);
    let Some((rule, binding)) = vs
        .rules
        .iter()
        .find_map(|r| r.matches(&stack_win, &input_win).map(|b| (r, b)))
    else {
        let op = if s.is_blank() {
            Operation::Accept
        } else {
            Operation::HaltReject
        };
        return Ok((s.clone(), op));
    };

    let mut stack = instantiate(&rule.stack_replace, &binding);
    stack.extend(s.stack().iter().skip(rule.stack_match.len()).cloned());
    let mut input = instantiate(&rule.input_replace, &binding);
    input.extend(s.input().iter().skip(rule.input_match.len()).cloned());

    // σ^k: positive k moves the dot right
    for _ in 0..rule.shift.unsigned_abs() {
        let (from, to, alpha) = if rule.shift > 0 {
            (&mut input, &mut stack, &vs.stack_alphabet)
        } else {
            (&mut stack, &mut input, &vs.input_alphabet)
        };
        let moved = if from.is_empty() {
            Symbol::blank()
        } else {
            from.remove(0)
        };
        if !alpha.contains(&moved) {
            return Err(domain(format!(
                "shift carries `{moved}` across the dot into an alphabet lacking it"
            )));
        }
        to.insert(0, moved);
    }

    Ok((DottedSequence::new(Word::new(stack), Word::new(input)), rule.operation()))
}

/// One row of a run: the state at `time` and what happened to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub time: usize,
    pub state: DottedSequence,
    pub operation: Operation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunTrace {
    pub steps: Vec<TraceStep>,
}

impl RunTrace {
    /// Label of the final row.
    pub fn outcome(&self) -> &Operation {
        &self.steps.last().expect("a trace has at least one row").operation
    }

    pub fn accepted(&self) -> bool {
        *self.outcome() == Operation::Accept
    }

    pub fn states(&self) -> impl Iterator<Item = &DottedSequence> {
        self.steps.iter().map(|s| &s.state)
    }
}

/// Iterates [`vs_step`] until accept, halt-reject, or `max_steps`
/// transitions.
pub fn vs_run(vs: &VersatileShift, s0: &DottedSequence, max_steps: usize) -> Result<RunTrace> {
    if max_steps == 0 {
        return Err(domain("max_steps must be at least 1"));
    }
    let mut steps = Vec::new();
    let mut state = s0.clone();
    for time in 0..=max_steps {
        if time == max_steps {
            steps.push(TraceStep {
                time,
                state,
                operation: Operation::StepLimit,
            });
            break;
        }
        let (next, op) = vs_step(vs, &state)?;
        let done = op.is_terminal();
        steps.push(TraceStep {
            time,
            state,
            operation: op,
        });
        if done {
            break;
        }
        state = next;
    }
    Ok(RunTrace { steps })
}

/// A context-free grammar without ε-productions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfg {
    nonterminals: Vec<Symbol>,
    terminals: Vec<Symbol>,
    rules: Vec<(Symbol, Word)>,
    start: Symbol,
}

impl Cfg {
    /// Nonterminals are the left-hand sides; every other right-hand-side
    /// symbol is a terminal. The first rule's left-hand side is the start.
    pub fn from_rules(rules: Vec<(Symbol, Word)>) -> Result<Self> {
        let Some((start, _)) = rules.first() else {
            return Err(domain("grammar has no rules"));
        };
        let start = start.clone();
        let mut nonterminals: Vec<Symbol> = Vec::new();
        for (lhs, rhs) in &rules {
            if rhs.is_empty() {
                return Err(domain(format!("rule for `{lhs}` has an empty right-hand side")));
            }
            if lhs.is_blank() || rhs.iter().any(Symbol::is_blank) {
                return Err(domain("the blank symbol cannot appear in a grammar"));
            }
            if !nonterminals.contains(lhs) {
                nonterminals.push(lhs.clone());
            }
        }
        let mut terminals: Vec<Symbol> = Vec::new();
        for (_, rhs) in &rules {
            for s in rhs.iter() {
                if !nonterminals.contains(s) && !terminals.contains(s) {
                    terminals.push(s.clone());
                }
            }
        }
        if terminals.is_empty() {
            return Err(domain("grammar has no terminal symbols"));
        }
        Ok(Cfg {
            nonterminals,
            terminals,
            rules,
            start,
        })
    }

    /// Parses one rule per line, `LHS -> RHS1 RHS2 …`, skipping blank lines
    /// and `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse { line: k + 1, message };
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| err(format!("expected `LHS -> RHS`, got `{line}`")))?;
            let lhs: Vec<&str> = lhs.split_whitespace().collect();
            let [lhs] = lhs[..] else {
                return Err(err("the left-hand side must be a single symbol".into()));
            };
            let rhs = Word::parse(rhs);
            if rhs.is_empty() {
                return Err(err(format!("empty right-hand side for `{lhs}`")));
            }
            if lhs == Symbol::BLANK || rhs.iter().any(Symbol::is_blank) {
                return Err(err("the blank symbol cannot appear in a grammar".into()));
            }
            rules.push((Symbol::new(lhs), rhs));
        }
        Self::from_rules(rules).map_err(|e| match e {
            Error::Domain(message) => Error::Parse { line: 0, message },
            other => other,
        })
    }

    pub fn nonterminals(&self) -> &[Symbol] {
        &self.nonterminals
    }

    pub fn terminals(&self) -> &[Symbol] {
        &self.terminals
    }

    pub fn rules(&self) -> &[(Symbol, Word)] {
        &self.rules
    }

    pub fn start(&self) -> &Symbol {
        &self.start
    }

    pub fn is_terminal(&self, s: &Symbol) -> bool {
        self.terminals.contains(s)
    }

    /// FIRST set of every nonterminal.
    fn first_sets(&self) -> BTreeMap<Symbol, BTreeSet<Symbol>> {
        let mut first: BTreeMap<Symbol, BTreeSet<Symbol>> = self
            .nonterminals
            .iter()
            .map(|n| (n.clone(), BTreeSet::new()))
            .collect();
        loop {
            let mut changed = false;
            for (lhs, rhs) in &self.rules {
                let add = self.first_of(&rhs[0], &first);
                let entry = first.get_mut(lhs).expect("lhs is a nonterminal");
                let before = entry.len();
                entry.extend(add);
                changed |= entry.len() != before;
            }
            if !changed {
                return first;
            }
        }
    }

    fn first_of(&self, s: &Symbol, first: &BTreeMap<Symbol, BTreeSet<Symbol>>) -> BTreeSet<Symbol> {
        if self.is_terminal(s) {
            BTreeSet::from([s.clone()])
        } else {
            first[s].clone()
        }
    }
}

fn rule_text(lhs: &Symbol, rhs: &Word) -> String {
    format!("{lhs} -> {rhs}")
}

/// Compiles a grammar into a top-down recognizer with domain of dependence
/// `(1, 1)`.
///
/// A nonterminal with a single rule `Z -> α` predicts on any input symbol
/// (`Z . a ↦ reverse(α) . a`). A nonterminal with several rules predicts per
/// lookahead terminal from the FIRST sets, and overlapping FIRST sets are a
/// conflict. Each terminal `t` gets an attach rule `t . t ↦ ε . ε`.
pub fn compile_cfg_topdown(g: &Cfg) -> Result<VersatileShift> {
    let first = g.first_sets();
    let mut rules = Vec::new();
    for z in g.nonterminals() {
        let alternatives: Vec<&Word> = g
            .rules()
            .iter()
            .filter(|(lhs, _)| lhs == z)
            .map(|(_, rhs)| rhs)
            .collect();
        let predict = |rhs: &Word, look: Slot| VsRule {
            label: RuleLabel::Predict(rule_text(z, rhs)),
            stack_match: vec![Slot::Sym(z.clone())],
            input_match: vec![look.clone()],
            // top of stack first: α read left to right
            stack_replace: rhs.iter().cloned().map(Slot::Sym).collect(),
            input_replace: vec![look],
            shift: 0,
        };
        if let [rhs] = alternatives[..] {
            rules.push(predict(rhs, Slot::Var));
            continue;
        }
        let firsts: Vec<BTreeSet<Symbol>> = alternatives
            .iter()
            .map(|rhs| g.first_of(&rhs[0], &first))
            .collect();
        for (a, b) in (0..alternatives.len()).tuple_combinations() {
            let overlap: Vec<&Symbol> = firsts[a].intersection(&firsts[b]).collect();
            if !overlap.is_empty() {
                return Err(Error::GrammarConflict(format!(
                    "`{}` and `{}` both start with {}",
                    rule_text(z, alternatives[a]),
                    rule_text(z, alternatives[b]),
                    overlap.iter().join(", ")
                )));
            }
        }
        for (rhs, looks) in alternatives.iter().zip(&firsts) {
            for t in looks {
                rules.push(predict(rhs, Slot::Sym(t.clone())));
            }
        }
    }
    for t in g.terminals() {
        rules.push(VsRule {
            label: RuleLabel::Attach,
            stack_match: vec![Slot::Sym(t.clone())],
            input_match: vec![Slot::Sym(t.clone())],
            stack_replace: vec![],
            input_replace: vec![],
            shift: 0,
        });
    }
    let stack_alphabet = Alphabet::with_blank(g.terminals().iter().chain(g.nonterminals()).cloned())?;
    let input_alphabet = Alphabet::with_blank(g.terminals().iter().cloned())?;
    VersatileShift::new(stack_alphabet, input_alphabet, Dod::new(1, 1)?, rules)
}

/// Initial tape `start . sentence`.
pub fn initial_tape(g: &Cfg, sentence: &Word) -> DottedSequence {
    DottedSequence::new(Word::new(vec![g.start().clone()]), sentence.clone())
}
