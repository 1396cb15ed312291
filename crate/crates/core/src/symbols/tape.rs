use std::fmt;

use super::{Alphabet, Symbol, Word};
use crate::error::{domain, Result};

/// How a one-sided sequence continues after its finite prefix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tail {
    /// Blank forever.
    Blank,
    /// The given non-empty word repeated forever.
    Periodic(Word),
}

/// A one-sided infinite sequence `a_1 a_2 …`, represented as a finite
/// prefix followed by an eventually periodic tail.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OneSidedSequence {
    alphabet: Alphabet,
    prefix: Word,
    tail: Tail,
}

impl OneSidedSequence {
    /// `prefix` followed by blanks. The alphabet must have a blank.
    pub fn finite(alphabet: &Alphabet, prefix: Word) -> Result<Self> {
        if !alphabet.has_blank() {
            return Err(domain("a blank tail needs an alphabet with a blank symbol"));
        }
        Self::checked(alphabet, prefix, Tail::Blank)
    }

    pub fn periodic(alphabet: &Alphabet, prefix: Word, cycle: Word) -> Result<Self> {
        if cycle.is_empty() {
            return Err(domain("a periodic tail needs a non-empty cycle"));
        }
        Self::checked(alphabet, prefix, Tail::Periodic(cycle))
    }

    fn checked(alphabet: &Alphabet, prefix: Word, tail: Tail) -> Result<Self> {
        let cycle: &[Symbol] = match &tail {
            Tail::Blank => &[],
            Tail::Periodic(c) => c,
        };
        if let Some(s) = prefix.iter().chain(cycle).find(|s| !alphabet.contains(s)) {
            return Err(domain(format!("symbol `{s}` is not in the alphabet")));
        }
        Ok(OneSidedSequence {
            alphabet: alphabet.clone(),
            prefix,
            tail,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn prefix(&self) -> &Word {
        &self.prefix
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub(crate) fn period(&self) -> usize {
        match &self.tail {
            Tail::Blank => 1,
            Tail::Periodic(c) => c.len(),
        }
    }

    /// The symbol at zero-based position `k`.
    pub fn symbol_at(&self, k: usize) -> &Symbol {
        if let Some(s) = self.prefix.get(k) {
            return s;
        }
        match &self.tail {
            Tail::Blank => self.alphabet.blank().expect("checked at construction"),
            Tail::Periodic(c) => &c[(k - self.prefix.len()) % c.len()],
        }
    }

    /// The first `n` symbols.
    pub fn take(&self, n: usize) -> Word {
        (0..n).map(|k| self.symbol_at(k).clone()).collect()
    }
}

/// A two-sided tape `stack . input`, blank-padded on both ends.
///
/// The stack is stored top first: `stack()[0]` sits immediately left of the
/// dot. Trailing blanks are trimmed so equal tapes compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DottedSequence {
    stack: Word,
    input: Word,
}

fn trimmed(word: Word) -> Word {
    let mut symbols = word.into_inner();
    while symbols.last().is_some_and(Symbol::is_blank) {
        symbols.pop();
    }
    Word::new(symbols)
}

impl DottedSequence {
    /// `stack` is given top first.
    pub fn new(stack: Word, input: Word) -> Self {
        DottedSequence {
            stack: trimmed(stack),
            input: trimmed(input),
        }
    }

    /// Builds a tape from the stack as written left of the dot, i.e. bottom
    /// first.
    pub fn from_tape_order(stack: Word, input: Word) -> Self {
        Self::new(stack.reversed(), input)
    }

    /// The all-blank tape `ε . ε`.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Parses `"VP NP . NP V NP"`; either side may be `ε` or empty.
    pub fn parse(text: &str) -> Result<Self> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let dots: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == ".")
            .map(|(k, _)| k)
            .collect();
        let [dot] = dots[..] else {
            return Err(domain(format!("`{text}` must contain exactly one ` . `")));
        };
        let side = |ts: &[&str]| Word::parse(&ts.join(" "));
        Ok(Self::from_tape_order(
            side(&tokens[..dot]),
            side(&tokens[dot + 1..]),
        ))
    }

    /// Stack, top first.
    pub fn stack(&self) -> &Word {
        &self.stack
    }

    pub fn input(&self) -> &Word {
        &self.input
    }

    /// Stack symbol `k` places left of the dot (0 = top), blank beyond.
    pub fn stack_at(&self, k: usize) -> Symbol {
        self.stack.get(k).cloned().unwrap_or_else(Symbol::blank)
    }

    /// Input symbol `k` places right of the dot, blank beyond.
    pub fn input_at(&self, k: usize) -> Symbol {
        self.input.get(k).cloned().unwrap_or_else(Symbol::blank)
    }

    pub fn is_blank(&self) -> bool {
        self.stack.is_empty() && self.input.is_empty()
    }

    /// The stack as written left of the dot (bottom first).
    pub fn stack_tape_order(&self) -> Word {
        self.stack.reversed()
    }
}

impl fmt::Display for DottedSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} . {}", self.stack_tape_order(), self.input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        let s = DottedSequence::parse("VP NP . NP V NP").unwrap();
        assert_eq!(s.stack_at(0), Symbol::new("NP"));
        assert_eq!(s.stack_at(1), Symbol::new("VP"));
        assert_eq!(s.stack_at(2), Symbol::blank());
        assert_eq!(s.to_string(), "VP NP . NP V NP");
        assert_eq!(DottedSequence::parse("ε . ε").unwrap(), DottedSequence::empty());
        assert_eq!(DottedSequence::empty().to_string(), "ε . ε");
        assert!(DottedSequence::parse("a b").is_err());
    }

    #[test]
    fn trailing_blanks_are_trimmed() {
        let a = DottedSequence::new(Word::parse("S ⊔ ⊔"), Word::parse("NP ⊔"));
        let b = DottedSequence::new(Word::parse("S"), Word::parse("NP"));
        assert_eq!(a, b);
        // interior blanks survive
        let c = DottedSequence::new(Word::empty(), Word::parse("⊔ NP"));
        assert_eq!(c.input().len(), 2);
    }

    #[test]
    fn periodic_symbols() {
        let alpha = Alphabet::new(["a", "b"]).unwrap();
        let s = OneSidedSequence::periodic(&alpha, Word::parse("b"), Word::parse("a b")).unwrap();
        assert_eq!(s.take(5), Word::parse("b a b a b"));
        assert!(OneSidedSequence::finite(&alpha, Word::parse("a")).is_err());
        assert!(OneSidedSequence::periodic(&alpha, Word::parse("c"), Word::parse("a")).is_err());
    }
}
