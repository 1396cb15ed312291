//! Alphabets, orderings and words over them.
//!
//! Everything in phase space is an exact rational. Floating point only shows
//! up once an automaton is turned into a network (see [`crate::neural`]).

mod encoding;
mod permutation;
mod tape;

pub use encoding::{
    cylinder, encode_digits, godel_decode, godel_encode, godel_encode_sequence, ultrametric,
    Interval, UnitRational,
};
pub(crate) use encoding::{inv_pow, pow};
pub use permutation::{recode, Permutation};
pub use tape::{DottedSequence, OneSidedSequence, Tail};

use std::fmt;
use std::ops::Deref;

use crate::error::{domain, Result};

/// A symbol token such as `NP` or `a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(String);

impl Symbol {
    /// Token used for the blank symbol.
    pub const BLANK: &'static str = "⊔";

    pub fn new(token: impl Into<String>) -> Self {
        Symbol(token.into())
    }

    pub fn blank() -> Self {
        Symbol(Self::BLANK.to_string())
    }

    pub fn is_blank(&self) -> bool {
        self.0 == Self::BLANK
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Symbol(s)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A finite word. The empty word prints as `ε`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Parses whitespace-separated tokens; `ε` (or an empty string) is the
    /// empty word.
    pub fn parse(text: &str) -> Self {
        text.split_whitespace()
            .filter(|t| *t != "ε")
            .map(Symbol::new)
            .collect()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Symbol> {
        self.0
    }

    pub fn reversed(&self) -> Word {
        self.0.iter().rev().cloned().collect()
    }
}

impl Deref for Word {
    type Target = [Symbol];

    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl FromIterator<Symbol> for Word {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// An ordered set of at least two distinct symbols, optionally with a blank.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<Symbol>,
    blank: Option<usize>,
}

impl Alphabet {
    /// An alphabet without a designated blank. A `⊔` token among `symbols`
    /// is still recognised as the blank.
    pub fn new<S: Into<Symbol>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<Symbol> = symbols.into_iter().map(Into::into).collect();
        let blank = symbols.iter().position(Symbol::is_blank);
        Self::validated(symbols, blank)
    }

    /// Adjoins the blank `⊔` in front of `symbols` (unless it is already
    /// present).
    pub fn with_blank<S: Into<Symbol>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut all = vec![Symbol::blank()];
        all.extend(
            symbols
                .into_iter()
                .map(Into::into)
                .filter(|s: &Symbol| !s.is_blank()),
        );
        Self::validated(all, Some(0))
    }

    fn validated(symbols: Vec<Symbol>, blank: Option<usize>) -> Result<Self> {
        if symbols.len() < 2 {
            return Err(domain(format!(
                "an alphabet needs at least two symbols, got {}",
                symbols.len()
            )));
        }
        for (k, s) in symbols.iter().enumerate() {
            if symbols[..k].contains(s) {
                return Err(domain(format!("duplicate symbol `{s}` in alphabet")));
            }
        }
        Ok(Alphabet { symbols, blank })
    }

    /// Cardinality `m`.
    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn blank(&self) -> Option<&Symbol> {
        self.blank.map(|k| &self.symbols[k])
    }

    pub fn has_blank(&self) -> bool {
        self.blank.is_some()
    }

    pub fn index_of(&self, symbol: &Symbol) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    pub fn contains(&self, symbol: &Symbol) -> bool {
        self.index_of(symbol).is_some()
    }

    /// Alphabet `{0, …, m-1}` written as decimal tokens. With `blank` set,
    /// the first symbol is `⊔` instead of `0`.
    pub fn digits(m: usize, blank: bool) -> Result<Self> {
        let symbols: Vec<Symbol> = (0..m)
            .map(|d| {
                if blank && d == 0 {
                    Symbol::blank()
                } else {
                    Symbol::new(d.to_string())
                }
            })
            .collect();
        Self::validated(symbols, blank.then_some(0))
    }
}

/// A bijection from an alphabet onto `{0, …, m-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolOrdering {
    alphabet: Alphabet,
    /// digit of the symbol at each alphabet index
    digit_of: Vec<usize>,
    /// alphabet index carrying each digit
    symbol_at: Vec<usize>,
}

impl SymbolOrdering {
    /// Orders symbols by their position in the alphabet.
    pub fn identity(alphabet: &Alphabet) -> Self {
        let m = alphabet.size();
        SymbolOrdering {
            alphabet: alphabet.clone(),
            digit_of: (0..m).collect(),
            symbol_at: (0..m).collect(),
        }
    }

    /// `digits[k]` is the digit assigned to the `k`-th alphabet symbol.
    pub fn from_digits(alphabet: &Alphabet, digits: Vec<usize>) -> Result<Self> {
        let m = alphabet.size();
        if digits.len() != m {
            return Err(domain(format!(
                "ordering lists {} digits for an alphabet of size {m}",
                digits.len()
            )));
        }
        let mut symbol_at = vec![usize::MAX; m];
        for (k, &d) in digits.iter().enumerate() {
            if d >= m || symbol_at[d] != usize::MAX {
                return Err(domain(format!(
                    "ordering is not a bijection onto 0..{m} (digit {d})"
                )));
            }
            symbol_at[d] = k;
        }
        Ok(SymbolOrdering {
            alphabet: alphabet.clone(),
            digit_of: digits,
            symbol_at,
        })
    }

    /// Builds an ordering from `symbol -> digit` pairs. When the alphabet has
    /// a blank that is not listed, it is pinned to `0`.
    pub fn from_assignments<'a>(
        alphabet: &Alphabet,
        pairs: impl IntoIterator<Item = (&'a str, usize)>,
    ) -> Result<Self> {
        let mut digits = vec![usize::MAX; alphabet.size()];
        for (token, d) in pairs {
            let k = alphabet
                .index_of(&Symbol::new(token))
                .ok_or_else(|| domain(format!("symbol `{token}` is not in the alphabet")))?;
            if digits[k] != usize::MAX {
                return Err(domain(format!("symbol `{token}` is assigned twice")));
            }
            digits[k] = d;
        }
        if let Some(b) = alphabet.blank {
            if digits[b] == usize::MAX {
                digits[b] = 0;
            }
        }
        if let Some(k) = digits.iter().position(|&d| d == usize::MAX) {
            return Err(domain(format!(
                "symbol `{}` has no digit",
                alphabet.symbols[k]
            )));
        }
        Self::from_digits(alphabet, digits)
    }

    /// Like [`from_assignments`](Self::from_assignments) but fails unless the
    /// blank ends up on digit 0.
    pub fn pinned<'a>(
        alphabet: &Alphabet,
        pairs: impl IntoIterator<Item = (&'a str, usize)>,
    ) -> Result<Self> {
        let ord = Self::from_assignments(alphabet, pairs)?;
        if !ord.blank_pinned() {
            return Err(domain("ordering must map the blank symbol to 0"));
        }
        Ok(ord)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn m(&self) -> usize {
        self.alphabet.size()
    }

    /// True when the alphabet has a blank and it is sent to 0.
    pub fn blank_pinned(&self) -> bool {
        self.alphabet.blank.is_some_and(|b| self.digit_of[b] == 0)
    }

    pub fn digit(&self, symbol: &Symbol) -> Result<usize> {
        self.alphabet
            .index_of(symbol)
            .map(|k| self.digit_of[k])
            .ok_or_else(|| domain(format!("symbol `{symbol}` is not in the alphabet")))
    }

    pub fn symbol(&self, digit: usize) -> Result<&Symbol> {
        self.symbol_at
            .get(digit)
            .map(|&k| &self.alphabet.symbols[k])
            .ok_or_else(|| domain(format!("digit {digit} out of range 0..{}", self.m())))
    }

    pub fn digits_of(&self, word: &[Symbol]) -> Result<Vec<usize>> {
        word.iter().map(|s| self.digit(s)).collect()
    }

    pub fn word_of(&self, digits: &[usize]) -> Result<Word> {
        digits.iter().map(|&d| self.symbol(d).cloned()).collect()
    }

    /// The permutation `π` with `π ∘ self = other` on digits.
    pub fn recoding_to(&self, other: &SymbolOrdering) -> Result<Permutation> {
        if self.alphabet != other.alphabet {
            return Err(domain("recoding between orderings of different alphabets"));
        }
        let mut image = vec![0; self.m()];
        for k in 0..self.m() {
            image[self.digit_of[k]] = other.digit_of[k];
        }
        Permutation::new(image)
    }
}
