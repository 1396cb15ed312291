//! Random small machines, encodings and tapes for property checks.

use rand::Rng;

use crate::nda::Orderings;
use crate::patterns::index_digits;
use crate::shift::{Dod, RuleLabel, Slot, VersatileShift, VsRule};
use crate::symbols::{Alphabet, DottedSequence, SymbolOrdering, Word};

/// A deterministic machine over `{⊔, 1, …, m-1}` with `m ≤ 3` and a domain of
/// dependence of at most `(2, 2)`. Every rule matches a full window and never
/// shifts more symbols across the dot than it wrote on that side, so its
/// action is affine on every cell.
pub fn random_machine<R: Rng>(rng: &mut R) -> VersatileShift {
    let m = rng.random_range(2..=3);
    let alpha = Alphabet::digits(m, true).expect("m >= 2");
    let dod = Dod::new(rng.random_range(0..=2), rng.random_range(0..=2)).unwrap_or(Dod { l: 1, r: 1 });
    let slot = |d: usize| Slot::Sym(alpha.symbols()[d].clone());
    let mut rules = Vec::new();
    for w in 0..m.pow((dod.l + dod.r) as u32) {
        if rng.random_bool(0.4) {
            continue;
        }
        let digits = index_digits(w, m, dod.l + dod.r);
        let stack_replace: Vec<Slot> = (0..rng.random_range(0..=3)).map(|_| slot(rng.random_range(0..m))).collect();
        let input_replace: Vec<Slot> = (0..rng.random_range(0..=3)).map(|_| slot(rng.random_range(0..m))).collect();
        let shift = rng.random_range(-(stack_replace.len() as i64)..=input_replace.len() as i64);
        rules.push(VsRule {
            label: RuleLabel::Named(format!("w{w}")),
            stack_match: digits[..dod.l].iter().map(|&d| slot(d)).collect(),
            input_match: digits[dod.l..].iter().map(|&d| slot(d)).collect(),
            stack_replace,
            input_replace,
            shift,
        });
    }
    VersatileShift::new(alpha.clone(), alpha, dod, rules).expect("full-window rules never overlap")
}

fn pinned_shuffle<R: Rng>(rng: &mut R, a: &Alphabet) -> SymbolOrdering {
    let mut rest: Vec<usize> = (1..a.size()).collect();
    for k in (1..rest.len()).rev() {
        rest.swap(k, rng.random_range(0..=k));
    }
    let mut digits = vec![0];
    digits.extend(rest);
    SymbolOrdering::from_digits(a, digits).expect("a permutation")
}

/// Uniform blank-pinned orderings of both machine alphabets.
pub fn random_orderings<R: Rng>(rng: &mut R, vs: &VersatileShift) -> Orderings {
    Orderings::new(
        pinned_shuffle(rng, vs.input_alphabet()),
        pinned_shuffle(rng, vs.stack_alphabet()),
    )
    .expect("blank pinned by construction")
}

/// A tape with up to six symbols on each side (blanks included).
pub fn random_tape<R: Rng>(rng: &mut R, vs: &VersatileShift) -> DottedSequence {
    let mut side = |a: &Alphabet| -> Word {
        (0..rng.random_range(0..=6))
            .map(|_| a.symbols()[rng.random_range(0..a.size())].clone())
            .collect()
    };
    let stack = side(vs.stack_alphabet());
    let input = side(vs.input_alphabet());
    DottedSequence::new(stack, input)
}
