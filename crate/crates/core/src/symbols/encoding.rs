use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};

use super::{OneSidedSequence, Symbol, SymbolOrdering, Tail};
use crate::error::{domain, Error, Result};

/// An exact rational in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitRational(BigRational);

impl UnitRational {
    pub fn new(value: BigRational) -> Result<Self> {
        if value < BigRational::zero() || value > BigRational::one() {
            return Err(domain(format!("{value} lies outside [0, 1]")));
        }
        Ok(UnitRational(value))
    }

    pub fn ratio(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(domain("zero denominator"));
        }
        Self::new(BigRational::new(numer.into(), denom.into()))
    }

    pub fn zero() -> Self {
        UnitRational(BigRational::zero())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for UnitRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A half-open interval `[lo, hi)` with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x < &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

pub(crate) fn pow(m: usize, k: usize) -> BigInt {
    Pow::pow(BigInt::from(m), k)
}

/// `m^{-k}`.
pub(crate) fn inv_pow(m: usize, k: usize) -> BigRational {
    BigRational::new(BigInt::one(), pow(m, k))
}

/// `Σ d_k m^{-k}` for a digit word, i.e. the encoding under the identity
/// ordering on `{0, …, m-1}`.
pub fn encode_digits(digits: &[usize], m: usize) -> BigRational {
    let numer = digits
        .iter()
        .fold(BigInt::zero(), |acc, &d| acc * BigInt::from(m) + BigInt::from(d));
    BigRational::new(numer, pow(m, digits.len()))
}

/// Goedel number of a finite word: `ψ(w) = Σ γ(a_k) m^{-k}`.
pub fn godel_encode(word: &[Symbol], ord: &SymbolOrdering) -> Result<UnitRational> {
    let digits = ord.digits_of(word)?;
    Ok(UnitRational(encode_digits(&digits, ord.m())))
}

/// Goedel number of a one-sided sequence. The tail must contribute nothing,
/// i.e. it is blank and the blank is pinned to 0.
pub fn godel_encode_sequence(
    seq: &OneSidedSequence,
    ord: &SymbolOrdering,
) -> Result<UnitRational> {
    if seq.alphabet() != ord.alphabet() {
        return Err(domain("sequence and ordering use different alphabets"));
    }
    let tail_is_zero = match seq.tail() {
        Tail::Blank => ord.blank_pinned(),
        Tail::Periodic(cycle) => cycle
            .iter()
            .map(|s| ord.digit(s))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .all(|&d| d == 0),
    };
    if !tail_is_zero {
        return Err(Error::Unsupported(
            "the infinite tail has a nonzero encoding; only blank tails under a pinned ordering terminate"
                .into(),
        ));
    }
    godel_encode(seq.prefix(), ord)
}

/// First `l` base-`m` digits of `x`. On left corners `k / m^l` this inverts
/// [`encode_digits`].
pub fn godel_decode(x: &UnitRational, m: usize, l: usize) -> Result<Vec<usize>> {
    if m < 2 {
        return Err(domain(format!("base must be at least 2, got {m}")));
    }
    if x.0.is_one() {
        // 1 = 0.(m-1)(m-1)… in base m
        return Ok(vec![m - 1; l]);
    }
    let scaled = &x.0 * BigRational::from_integer(pow(m, l));
    let mut n = scaled.floor().to_integer();
    let base = BigInt::from(m);
    let mut digits = vec![0; l];
    for slot in digits.iter_mut().rev() {
        let (q, r) = n.div_rem(&base);
        *slot = r.to_usize().expect("digit below base");
        n = q;
    }
    Ok(digits)
}

/// The ultrametric `d(p, q)`: `0` when equal, otherwise `m^{-n}` where `n`
/// is the length of the longest common prefix (so `1` when the first
/// symbols differ).
pub fn ultrametric(p: &OneSidedSequence, q: &OneSidedSequence) -> Result<BigRational> {
    if p.alphabet() != q.alphabet() {
        return Err(domain("ultrametric between sequences over different alphabets"));
    }
    let m = p.alphabet().size();
    // two eventually periodic sequences agree everywhere once they agree up
    // to the longest prefix plus a common period
    let horizon = p.prefix().len().max(q.prefix().len()) + p.period().lcm(&q.period());
    for k in 0..horizon {
        if p.symbol_at(k) != q.symbol_at(k) {
            return Ok(inv_pow(m, k));
        }
    }
    Ok(BigRational::zero())
}

/// The image `[ψ(w), ψ(w) + m^{-l})` of the cylinder set of `w`.
pub fn cylinder(word: &[Symbol], ord: &SymbolOrdering) -> Result<Interval> {
    let lo = godel_encode(word, ord)?.into_inner();
    let hi = &lo + inv_pow(ord.m(), word.len());
    Ok(Interval { lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{Alphabet, Word};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn binary_word_b_then_as_is_one_half() {
        let alpha = Alphabet::new(["a", "b"]).unwrap();
        let ord = SymbolOrdering::identity(&alpha);
        for r in 1..6 {
            let mut w = vec![Symbol::new("b")];
            w.extend(std::iter::repeat_n(Symbol::new("a"), r - 1));
            assert_eq!(godel_encode(&w, &ord).unwrap().value(), &q(1, 2));
        }
    }

    #[test]
    fn empty_word_encodes_to_zero() {
        let alpha = Alphabet::new(["x", "y", "z"]).unwrap();
        let ord = SymbolOrdering::from_digits(&alpha, vec![2, 0, 1]).unwrap();
        assert_eq!(godel_encode(&[], &ord).unwrap(), UnitRational::zero());
    }

    #[test]
    fn ternary_word_one_zero_two() {
        // 1/3 + 0/9 + 2/27
        let alpha = Alphabet::digits(3, false).unwrap();
        let ord = SymbolOrdering::identity(&alpha);
        let w = Word::parse("1 0 2");
        assert_eq!(godel_encode(&w, &ord).unwrap().value(), &q(11, 27));
    }

    #[test]
    fn decode_corners() {
        let x = UnitRational::ratio(6, 9).unwrap();
        assert_eq!(godel_decode(&x, 3, 2).unwrap(), vec![2, 0]);
        let x = UnitRational::ratio(10, 27).unwrap();
        assert_eq!(godel_decode(&x, 3, 3).unwrap(), vec![1, 0, 1]);
        for m in 2..6 {
            for l in 0..4 {
                assert_eq!(godel_decode(&UnitRational::zero(), m, l).unwrap(), vec![0; l]);
            }
        }
    }

    #[test]
    fn decode_truncates_and_rejects_bad_base() {
        let x = UnitRational::ratio(1, 2).unwrap();
        // 1/2 = 0.1111… in base 3
        assert_eq!(godel_decode(&x, 3, 4).unwrap(), vec![1, 1, 1, 1]);
        assert_eq!(godel_decode(&UnitRational::ratio(1, 1).unwrap(), 3, 2).unwrap(), vec![2, 2]);
        assert!(matches!(godel_decode(&x, 1, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn unknown_symbol_is_a_domain_error() {
        let alpha = Alphabet::new(["a", "b"]).unwrap();
        let ord = SymbolOrdering::identity(&alpha);
        let err = godel_encode(&Word::parse("a c"), &ord).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn infinite_nonblank_tail_is_unsupported() {
        let alpha = Alphabet::with_blank(["a", "b"]).unwrap();
        let ord = SymbolOrdering::identity(&alpha);
        let seq = OneSidedSequence::periodic(&alpha, Word::parse("a"), Word::parse("b")).unwrap();
        assert!(matches!(
            godel_encode_sequence(&seq, &ord),
            Err(Error::Unsupported(_))
        ));
        let seq = OneSidedSequence::finite(&alpha, Word::parse("b a")).unwrap();
        assert_eq!(
            godel_encode_sequence(&seq, &ord).unwrap().value(),
            &q(2 * 3 + 1, 9)
        );
        // an unpinned blank makes the blank tail nonzero
        let unpinned = SymbolOrdering::from_digits(&alpha, vec![1, 0, 2]).unwrap();
        assert!(godel_encode_sequence(&seq, &unpinned).is_err());
    }

    #[test]
    fn ultrametric_cases() {
        let alpha = Alphabet::new(["a", "b", "c"]).unwrap();
        let seq = |w: &str, tail: &str| {
            OneSidedSequence::periodic(&alpha, Word::parse(w), Word::parse(tail)).unwrap()
        };
        let p = seq("a b c", "a");
        assert_eq!(ultrametric(&p, &p).unwrap(), BigRational::zero());
        assert_eq!(ultrametric(&p, &seq("b", "a")).unwrap(), BigRational::one());
        assert_eq!(ultrametric(&p, &seq("a b b", "a")).unwrap(), q(1, 9));
        // same sequence written two ways
        assert_eq!(
            ultrametric(&seq("a b", "a b"), &seq("", "a b")).unwrap(),
            BigRational::zero()
        );
        let other = Alphabet::new(["a", "b", "d"]).unwrap();
        let r = OneSidedSequence::periodic(&other, Word::parse("a"), Word::parse("a")).unwrap();
        assert!(ultrametric(&p, &r).is_err());
    }

    #[test]
    fn cylinder_examples() {
        let alpha = Alphabet::digits(3, false).unwrap();
        let ord = SymbolOrdering::identity(&alpha);
        let c = cylinder(&[], &ord).unwrap();
        assert_eq!((c.lo, c.hi), (q(0, 1), q(1, 1)));
        let c = cylinder(&Word::parse("2 0"), &ord).unwrap();
        assert_eq!((c.lo.clone(), c.hi.clone()), (q(6, 9), q(7, 9)));
        assert_eq!(c.to_string(), "[2/3, 7/9)");
    }
}
