//! Nonlinear dynamical automata: a versatile shift seen through a pair of
//! Goedel encodings, as a piecewise affine map on the unit square.
//!
//! `y1` carries the input (right of the dot) and `y2` the stack (left of the
//! dot, read top first). The square is cut into `m_in^r` strips along `y1`
//! and `m_st^l` strips along `y2`; each rectangle gets its own affine map
//! `y ↦ a + λ·y` (componentwise).

use std::fmt;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::patterns::{index_digits, DEFAULT_CELL_LIMIT};
use crate::shift::{vs_step, Dod, VersatileShift};
use crate::symbols::{godel_decode, godel_encode, inv_pow, pow, DottedSequence, Interval, Symbol, SymbolOrdering, UnitRational, Word};

/// A point `(y1, y2)` of `[0, 1)²`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhasePoint {
    pub y1: UnitRational,
    pub y2: UnitRational,
}

impl PhasePoint {
    pub fn new(y1: BigRational, y2: BigRational) -> Result<Self> {
        for y in [&y1, &y2] {
            if y.is_negative() || *y >= BigRational::one() {
                return Err(domain(format!("{y} lies outside [0, 1)")));
            }
        }
        Ok(PhasePoint {
            y1: UnitRational::new(y1)?,
            y2: UnitRational::new(y2)?,
        })
    }

    pub fn ratio(y1: (i64, i64), y2: (i64, i64)) -> Result<Self> {
        let r = |(n, d): (i64, i64)| -> Result<BigRational> {
            if d == 0 {
                return Err(domain("zero denominator"));
            }
            Ok(BigRational::new(n.into(), d.into()))
        };
        Self::new(r(y1)?, r(y2)?)
    }

    pub fn origin() -> Self {
        PhasePoint {
            y1: UnitRational::zero(),
            y2: UnitRational::zero(),
        }
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [self.y1.to_f64(), self.y2.to_f64()]
    }

    pub fn coords(&self) -> [&BigRational; 2] {
        [self.y1.value(), self.y2.value()]
    }
}

impl fmt::Display for PhasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.y1, self.y2)
    }
}

/// The encoding pair: one ordering per side, both with the blank on 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orderings {
    pub input: SymbolOrdering,
    pub stack: SymbolOrdering,
}

impl Orderings {
    pub fn new(input: SymbolOrdering, stack: SymbolOrdering) -> Result<Self> {
        if !input.blank_pinned() || !stack.blank_pinned() {
            return Err(domain("both orderings must send the blank to 0"));
        }
        Ok(Orderings { input, stack })
    }

    pub fn m_in(&self) -> usize {
        self.input.m()
    }

    pub fn m_st(&self) -> usize {
        self.stack.m()
    }
}

/// Encodes a tape: `y1 = ψ(input)`, `y2 = ψ(stack, top first)`.
pub fn encode_tape(s: &DottedSequence, ord: &Orderings) -> Result<PhasePoint> {
    let y1 = godel_encode(s.input(), &ord.input)?;
    let y2 = godel_encode(s.stack(), &ord.stack)?;
    // finite words over a blank-pinned ordering never reach 1
    PhasePoint::new(y1.into_inner(), y2.into_inner())
}

/// Index of the strip of `[0, 1)` cut into `cells` pieces that contains `y`.
pub(crate) fn strip_of(y: &BigRational, cells: usize) -> usize {
    let k = (y * BigRational::from_integer(cells.into()))
        .floor()
        .to_integer()
        .to_usize()
        .unwrap_or(0);
    k.min(cells - 1)
}

/// One rectangle of the partition and its affine map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NdaCell {
    /// Input strip (along `y1`).
    pub i: usize,
    /// Stack strip (along `y2`).
    pub j: usize,
    pub input_interval: Interval,
    pub stack_interval: Interval,
    pub a: [BigRational; 2],
    pub lambda: [BigRational; 2],
    /// Index of the rule that fires here, `None` for halt cells.
    pub rule: Option<usize>,
    pub label: String,
}

impl NdaCell {
    pub fn contains(&self, p: &PhasePoint) -> bool {
        self.input_interval.contains(p.y1.value()) && self.stack_interval.contains(p.y2.value())
    }

    pub fn is_halt(&self) -> bool {
        self.rule.is_none()
    }

    fn apply(&self, p: &PhasePoint) -> [BigRational; 2] {
        let [y1, y2] = p.coords();
        [
            &self.a[0] + &self.lambda[0] * y1,
            &self.a[1] + &self.lambda[1] * y2,
        ]
    }
}

/// Where a point sits in the partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellLocation {
    pub i: usize,
    pub j: usize,
    /// First `r` input digits.
    pub input_digits: Vec<usize>,
    /// First `l` stack digits, top first.
    pub stack_digits: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nda {
    cells: Vec<NdaCell>,
    dod: Dod,
    orderings: Orderings,
}

impl Nda {
    /// The one-cell automaton that leaves every point in place.
    pub fn identity(orderings: Orderings) -> Self {
        let unit = Interval {
            lo: BigRational::zero(),
            hi: BigRational::one(),
        };
        let cell = NdaCell {
            i: 0,
            j: 0,
            input_interval: unit.clone(),
            stack_interval: unit,
            a: [BigRational::zero(), BigRational::zero()],
            lambda: [BigRational::one(), BigRational::one()],
            rule: None,
            label: "halt".into(),
        };
        Nda {
            cells: vec![cell],
            dod: Dod { l: 0, r: 0 },
            orderings,
        }
    }

    pub fn cells(&self) -> &[NdaCell] {
        &self.cells
    }

    pub fn dod(&self) -> Dod {
        self.dod
    }

    pub fn orderings(&self) -> &Orderings {
        &self.orderings
    }

    /// Strips along `y1`: `m_in^r`.
    pub fn input_strips(&self) -> usize {
        self.orderings.m_in().pow(self.dod.r as u32)
    }

    /// Strips along `y2`: `m_st^l`.
    pub fn stack_strips(&self) -> usize {
        self.orderings.m_st().pow(self.dod.l as u32)
    }

    pub fn cell(&self, i: usize, j: usize) -> &NdaCell {
        &self.cells[i * self.stack_strips() + j]
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i * self.stack_strips() + j
    }

    /// Overwrites one cell's affine map. Meant for fault-injection checks.
    pub fn set_cell_map(&mut self, i: usize, j: usize, a: [BigRational; 2], lambda: [BigRational; 2]) {
        let k = self.cell_index(i, j);
        self.cells[k].a = a;
        self.cells[k].lambda = lambda;
    }

    /// Writes the cell table as CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j", "I_i", "J_j", "a1", "a2", "lambda1", "lambda2", "rule"])?;
        for c in &self.cells {
            w.write_record([
                c.i.to_string(),
                c.j.to_string(),
                c.input_interval.to_string(),
                c.stack_interval.to_string(),
                c.a[0].to_string(),
                c.a[1].to_string(),
                c.lambda[0].to_string(),
                c.lambda[1].to_string(),
                c.label.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Locates the cell of `p` and the window digits of its corner.
pub fn decode_point(p: &PhasePoint, nda: &Nda) -> CellLocation {
    let i = strip_of(p.y1.value(), nda.input_strips());
    let j = strip_of(p.y2.value(), nda.stack_strips());
    CellLocation {
        i,
        j,
        input_digits: index_digits(i, nda.orderings.m_in(), nda.dod.r),
        stack_digits: index_digits(j, nda.orderings.m_st(), nda.dod.l),
    }
}

/// Applies the affine map of the cell containing `p`.
pub fn nda_step(nda: &Nda, p: &PhasePoint) -> Result<PhasePoint> {
    let loc = decode_point(p, nda);
    let cell = nda.cell(loc.i, loc.j);
    let [y1, y2] = cell.apply(p);
    PhasePoint::new(y1, y2).map_err(|_| {
        Error::Consistency(format!(
            "cell ({}, {}) maps {p} outside the unit square",
            loc.i, loc.j
        ))
    })
}

/// `p0` followed by `steps` iterates.
pub fn nda_orbit(nda: &Nda, p0: &PhasePoint, steps: usize) -> Result<Vec<PhasePoint>> {
    let mut orbit = vec![p0.clone()];
    for _ in 0..steps {
        let next = nda_step(nda, orbit.last().expect("non-empty"))?;
        orbit.push(next);
    }
    Ok(orbit)
}

/// Settings for [`from_versatile_shift_with`].
#[derive(Clone, Debug)]
pub struct NdaBuildOptions {
    /// Random tapes checked per cell after solving for the coefficients.
    pub samples_per_cell: usize,
    pub seed: u64,
    /// Largest random tail appended beyond the window on each side.
    pub max_tail: usize,
    pub cell_limit: u128,
}

impl Default for NdaBuildOptions {
    fn default() -> Self {
        NdaBuildOptions {
            samples_per_cell: 32,
            seed: 0x5eed,
            max_tail: 4,
            cell_limit: DEFAULT_CELL_LIMIT,
        }
    }
}

/// [`from_versatile_shift_with`] under default options.
pub fn from_versatile_shift(vs: &VersatileShift, ord: &Orderings) -> Result<Nda> {
    from_versatile_shift_with(vs, ord, &NdaBuildOptions::default())
}

fn window_tape(
    ord: &Orderings,
    stack_digits: &[usize],
    input_digits: &[usize],
    stack_tail: &[Symbol],
    input_tail: &[Symbol],
) -> Result<DottedSequence> {
    let mut stack = ord.stack.word_of(stack_digits)?.into_inner();
    stack.extend_from_slice(stack_tail);
    let mut input = ord.input.word_of(input_digits)?.into_inner();
    input.extend_from_slice(input_tail);
    Ok(DottedSequence::new(Word::new(stack), Word::new(input)))
}

/// Exponent `k` with `λ = m^k`, if there is one.
fn power_exponent(lambda: &BigRational, m: usize) -> Option<i64> {
    if !lambda.is_positive() {
        return None;
    }
    let (num, den) = (lambda.numer(), lambda.denom());
    let (big, sign) = if den.is_one() { (num, 1) } else if num.is_one() { (den, -1) } else { return None };
    let mut k = 0usize;
    loop {
        let p: BigInt = pow(m, k);
        if &p == big {
            return Some(sign * k as i64);
        }
        if &p > big {
            return None;
        }
        k += 1;
    }
}

/// Builds the automaton of `vs` under `ord`.
///
/// Each cell's coefficients are solved from two tapes that agree on the
/// window and differ beyond it, then checked on random tapes in the cell.
pub fn from_versatile_shift_with(vs: &VersatileShift, ord: &Orderings, opts: &NdaBuildOptions) -> Result<Nda> {
    if ord.input.alphabet() != vs.input_alphabet() || ord.stack.alphabet() != vs.stack_alphabet() {
        return Err(domain("orderings do not match the machine alphabets"));
    }
    let dod = vs.dod();
    let (m_in, m_st) = (ord.m_in(), ord.m_st());
    let cells = (m_in as u128)
        .checked_pow(dod.r as u32)
        .and_then(|a| a.checked_mul((m_st as u128).checked_pow(dod.l as u32)?))
        .unwrap_or(u128::MAX);
    if cells > opts.cell_limit {
        return Err(Error::ResourceLimit {
            cells,
            limit: opts.cell_limit,
        });
    }
    let (n_in, n_st) = (m_in.pow(dod.r as u32), m_st.pow(dod.l as u32));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let input_probe = ord.input.symbol(1)?.clone();
    let stack_probe = ord.stack.symbol(1)?.clone();

    let mut table = Vec::with_capacity(n_in * n_st);
    for i in 0..n_in {
        let input_digits = index_digits(i, m_in, dod.r);
        for j in 0..n_st {
            let stack_digits = index_digits(j, m_st, dod.l);
            let non_affine = |reason: String| Error::NonAffine { i, j, reason };
            let base = window_tape(ord, &stack_digits, &input_digits, &[], &[])?;
            let interval = |k: usize, m: usize, len: usize| Interval {
                lo: BigRational::new(k.into(), pow(m, len)),
                hi: BigRational::new((k + 1).into(), pow(m, len)),
            };
            let mut cell = NdaCell {
                i,
                j,
                input_interval: interval(i, m_in, dod.r),
                stack_interval: interval(j, m_st, dod.l),
                a: [BigRational::zero(), BigRational::zero()],
                lambda: [BigRational::one(), BigRational::one()],
                rule: vs.matching_rule(&base),
                label: "halt".into(),
            };
            let Some(rule) = cell.rule else {
                table.push(cell);
                continue;
            };
            cell.label = vs.rules()[rule].label_text();

            let image = |s: &DottedSequence| -> Result<PhasePoint> {
                let (next, _) = vs_step(vs, s).map_err(|e| non_affine(e.to_string()))?;
                encode_tape(&next, ord).map_err(|e| non_affine(e.to_string()))
            };
            let probes = [
                window_tape(ord, &stack_digits, &input_digits, &[], std::slice::from_ref(&input_probe))?,
                window_tape(ord, &stack_digits, &input_digits, std::slice::from_ref(&stack_probe), &[])?,
            ];
            let p0 = encode_tape(&base, ord)?;
            let q0 = image(&base)?;
            for d in 0..2 {
                let p1 = encode_tape(&probes[d], ord)?;
                let q1 = image(&probes[d])?;
                let lambda = (q1.coords()[d] - q0.coords()[d]) / (p1.coords()[d] - p0.coords()[d]);
                let m = if d == 0 { m_in } else { m_st };
                if power_exponent(&lambda, m).is_none() {
                    return Err(non_affine(format!(
                        "rule `{}` scales coordinate {} by {lambda}, not a power of {m}",
                        vs.rules()[rule],
                        d + 1
                    )));
                }
                cell.a[d] = q0.coords()[d] - &lambda * p0.coords()[d];
                cell.lambda[d] = lambda;
            }

            for _ in 0..opts.samples_per_cell {
                let tail = |rng: &mut ChaCha8Rng, o: &SymbolOrdering| -> Result<Vec<Symbol>> {
                    let len = rng.random_range(0..=opts.max_tail);
                    (0..len).map(|_| o.symbol(rng.random_range(0..o.m())).cloned()).collect()
                };
                let st = tail(&mut rng, &ord.stack)?;
                let it = tail(&mut rng, &ord.input)?;
                let s = window_tape(ord, &stack_digits, &input_digits, &st, &it)?;
                let got = image(&s)?;
                let want = cell.apply(&encode_tape(&s, ord)?);
                if got.coords() != [&want[0], &want[1]] {
                    return Err(non_affine(format!(
                        "rule `{}` on tape {s} gives {got}, the solved map predicts ({}, {})",
                        vs.rules()[rule],
                        want[0],
                        want[1]
                    )));
                }
            }
            table.push(cell);
        }
    }
    Ok(Nda {
        cells: table,
        dod,
        orderings: ord.clone(),
    })
}

/// Recovers the finite tape of a point whose expansion terminates within
/// `max_len` digits per side. Points with longer expansions give `None`.
pub fn decode_tape(p: &PhasePoint, ord: &Orderings, max_len: usize) -> Result<Option<DottedSequence>> {
    let side = |y: &UnitRational, o: &SymbolOrdering| -> Result<Option<Word>> {
        if !(y.value() / inv_pow(o.m(), max_len)).is_integer() {
            return Ok(None);
        }
        Ok(Some(o.word_of(&godel_decode(y, o.m(), max_len)?)?))
    };
    let (Some(input), Some(stack)) = (side(&p.y1, &ord.input)?, side(&p.y2, &ord.stack)?) else {
        return Ok(None);
    };
    Ok(Some(DottedSequence::new(stack, input)))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::harness::random::{random_machine, random_orderings, random_tape};
    use crate::shift::{compile_cfg_topdown, initial_tape, vs_run, Cfg, RuleLabel, VsRule};
    use crate::patterns::digits_index;
    use crate::symbols::Alphabet;

    pub(crate) const GRAMMAR: &str = "S -> NP VP\nVP -> V NP\n";

    pub(crate) fn machine() -> (Cfg, VersatileShift) {
        let g = Cfg::parse(GRAMMAR).unwrap();
        let vs = compile_cfg_topdown(&g).unwrap();
        (g, vs)
    }

    pub(crate) fn gamma(vs: &VersatileShift) -> Orderings {
        Orderings::new(
            SymbolOrdering::pinned(vs.input_alphabet(), [("NP", 1), ("V", 2)]).unwrap(),
            SymbolOrdering::pinned(vs.stack_alphabet(), [("NP", 1), ("V", 2), ("VP", 3), ("S", 4)]).unwrap(),
        )
        .unwrap()
    }

    pub(crate) fn delta(vs: &VersatileShift) -> Orderings {
        Orderings::new(
            SymbolOrdering::pinned(vs.input_alphabet(), [("NP", 2), ("V", 1)]).unwrap(),
            SymbolOrdering::pinned(vs.stack_alphabet(), [("NP", 4), ("V", 3), ("VP", 1), ("S", 2)]).unwrap(),
        )
        .unwrap()
    }

    fn tape(s: &str) -> DottedSequence {
        DottedSequence::parse(s).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn encoding_tapes() {
        let (_, vs) = machine();
        let g = gamma(&vs);
        assert_eq!(encode_tape(&DottedSequence::empty(), &g).unwrap(), PhasePoint::origin());
        assert_eq!(encode_tape(&tape("S . NP V NP"), &g).unwrap(), PhasePoint::ratio((16, 27), (4, 5)).unwrap());
        assert_eq!(encode_tape(&tape("VP . V NP"), &g).unwrap(), PhasePoint::ratio((7, 9), (3, 5)).unwrap());
        // stack is read from the dot outwards
        assert_eq!(encode_tape(&tape("VP NP . ε"), &g).unwrap(), PhasePoint::ratio((0, 1), (8, 25)).unwrap());
        assert!(encode_tape(&tape("dog . NP"), &g).is_err());
    }

    #[test]
    fn decoding_points() {
        let (_, vs) = machine();
        let nda = from_versatile_shift(&vs, &gamma(&vs)).unwrap();
        let loc = decode_point(&PhasePoint::ratio((16, 27), (4, 5)).unwrap(), &nda);
        assert_eq!((loc.input_digits, loc.stack_digits), (vec![1], vec![4]));
        let loc = decode_point(&PhasePoint::origin(), &nda);
        assert_eq!((loc.i, loc.j), (0, 0));
        // left endpoints belong to the cell
        let loc = decode_point(&PhasePoint::ratio((1, 3), (2, 5)).unwrap(), &nda);
        assert_eq!((loc.i, loc.j), (1, 2));
        assert!(nda.cell(1, 2).contains(&PhasePoint::ratio((1, 3), (2, 5)).unwrap()));
    }

    #[test]
    fn cell_coefficients() {
        let (_, vs) = machine();
        let g = gamma(&vs);
        let nda = from_versatile_shift(&vs, &g).unwrap();
        assert_eq!(nda.cells().len(), 15);
        // attach NP: input NP (i = 1), stack NP (j = 1)
        let c = nda.cell(1, 1);
        assert_eq!(c.label, "attach");
        assert_eq!(c.lambda, [q(3, 1), q(5, 1)]);
        assert_eq!(c.a, [q(-1, 1), q(-1, 1)]);
        let c = nda.cell(2, 2);
        assert_eq!(c.a, [q(-2, 1), q(-2, 1)]);
        // predict S -> NP VP on input V: input untouched, stack one for two
        let c = nda.cell(2, 4);
        assert_eq!(c.label, "predict(S -> NP VP)");
        assert_eq!(c.lambda, [q(1, 1), q(1, 5)]);
        assert_eq!(c.a[0], q(0, 1));
        assert_eq!(c.a[1], q(1, 5) + q(3, 25) - q(4, 25));
        // halt cells map identically
        for c in nda.cells().iter().filter(|c| c.is_halt()) {
            assert_eq!(c.lambda, [q(1, 1), q(1, 1)]);
            assert_eq!(c.a, [q(0, 1), q(0, 1)]);
        }
        assert_eq!(nda.cells().iter().filter(|c| !c.is_halt()).count(), 6);
    }

    #[test]
    fn lambdas_are_powers() {
        let (_, vs) = machine();
        for ord in [gamma(&vs), delta(&vs)] {
            let nda = from_versatile_shift(&vs, &ord).unwrap();
            for c in nda.cells() {
                assert!(power_exponent(&c.lambda[0], ord.m_in()).is_some());
                assert!(power_exponent(&c.lambda[1], ord.m_st()).is_some());
            }
        }
        assert_eq!(power_exponent(&q(1, 25), 5), Some(-2));
        assert_eq!(power_exponent(&q(2, 5), 5), None);
        assert_eq!(power_exponent(&q(-5, 1), 5), None);
    }

    #[test]
    fn toy_sentence_commutes() {
        let (g, vs) = machine();
        for ord in [gamma(&vs), delta(&vs)] {
            let nda = from_versatile_shift(&vs, &ord).unwrap();
            let trace = vs_run(&vs, &initial_tape(&g, &Word::parse("NP V NP")), 20).unwrap();
            let states: Vec<_> = trace.states().collect();
            for w in states.windows(2) {
                let p = encode_tape(w[0], &ord).unwrap();
                assert_eq!(nda_step(&nda, &p).unwrap(), encode_tape(w[1], &ord).unwrap());
            }
            assert_eq!(nda_step(&nda, &PhasePoint::origin()).unwrap(), PhasePoint::origin());
        }
    }

    #[test]
    fn long_orbit_follows_the_shift() {
        let g = Cfg::parse("S -> NP VP\nVP -> V S2\nS2 -> NP VP2\nVP2 -> V NP\n").unwrap();
        let vs = compile_cfg_topdown(&g).unwrap();
        let input = vs.input_alphabet();
        let stack = vs.stack_alphabet();
        let ord = Orderings::new(
            SymbolOrdering::identity(input),
            SymbolOrdering::identity(stack),
        )
        .unwrap();
        let nda = from_versatile_shift(&vs, &ord).unwrap();
        let s0 = initial_tape(&g, &Word::parse("NP V NP V NP"));
        let trace = vs_run(&vs, &s0, 20).unwrap();
        assert!(trace.accepted());
        let mut states: Vec<DottedSequence> = trace.states().cloned().collect();
        while states.len() < 21 {
            states.push(states.last().unwrap().clone());
        }
        let orbit = nda_orbit(&nda, &encode_tape(&s0, &ord).unwrap(), 20).unwrap();
        for (s, p) in states.iter().zip(&orbit) {
            assert_eq!(&encode_tape(s, &ord).unwrap(), p);
            assert_eq!(decode_tape(p, &ord, 12).unwrap().as_ref(), Some(s));
        }
    }

    #[test]
    fn grid_points_lie_in_exactly_one_cell() {
        let (_, vs) = machine();
        let nda = from_versatile_shift(&vs, &delta(&vs)).unwrap();
        for a in 0..64 {
            for b in 0..64 {
                let p = PhasePoint::ratio((a, 64), (b, 64)).unwrap();
                let hits: Vec<_> = nda.cells().iter().filter(|c| c.contains(&p)).collect();
                assert_eq!(hits.len(), 1);
                let loc = decode_point(&p, &nda);
                assert_eq!((hits[0].i, hits[0].j), (loc.i, loc.j));
            }
        }
    }

    #[test]
    fn random_machines_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..12 {
            let vs = random_machine(&mut rng);
            let ord = random_orderings(&mut rng, &vs);
            let nda = from_versatile_shift(&vs, &ord).unwrap();
            for _ in 0..100 {
                let s = random_tape(&mut rng, &vs);
                let (next, _) = vs_step(&vs, &s).unwrap();
                let p = encode_tape(&s, &ord).unwrap();
                assert_eq!(
                    nda_step(&nda, &p).unwrap(),
                    encode_tape(&next, &ord).unwrap(),
                    "tape {s} on {:?} {:?}",
                    vs.dod(),
                    vs.rules().iter().map(|r| r.to_string()).collect::<Vec<_>>()
                );
            }
        }
    }

    #[test]
    fn coupling_rules_are_rejected() {
        // popping below the window moves an unseen stack symbol into the input
        let alpha = Alphabet::digits(2, true).unwrap();
        let rule = VsRule::parse(RuleLabel::Named("pop".into()), "1 . ε", "ε . ε", -1).unwrap();
        let vs = VersatileShift::new(alpha.clone(), alpha.clone(), Dod::new(1, 0).unwrap(), vec![rule]).unwrap();
        let ord = Orderings::new(SymbolOrdering::identity(&alpha), SymbolOrdering::identity(&alpha)).unwrap();
        let err = from_versatile_shift(&vs, &ord).unwrap_err();
        assert!(matches!(err, Error::NonAffine { i: 0, j: 1, .. }), "{err}");
    }

    #[test]
    fn corrupted_cell_breaks_commutation() {
        let (_, vs) = machine();
        let g = gamma(&vs);
        let mut nda = from_versatile_shift(&vs, &g).unwrap();
        nda.set_cell_map(1, 1, [q(-1, 1), q(-4, 5)], [q(3, 1), q(5, 1)]);
        let s = tape("VP NP . NP V NP");
        let (next, _) = vs_step(&vs, &s).unwrap();
        assert_ne!(nda_step(&nda, &encode_tape(&s, &g).unwrap()).unwrap(), encode_tape(&next, &g).unwrap());
    }

    #[test]
    fn identity_automaton_and_csv() {
        let (_, vs) = machine();
        let nda = Nda::identity(gamma(&vs));
        let p = PhasePoint::ratio((5, 7), (1, 3)).unwrap();
        assert_eq!(nda_step(&nda, &p).unwrap(), p);
        let nda = from_versatile_shift(&vs, &gamma(&vs)).unwrap();
        let mut buf = Vec::new();
        nda.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 16);
        assert!(text.contains("1,1,\"[1/3, 2/3)\",\"[1/5, 2/5)\",-1,-1,3,5,attach"), "{text}");
    }

    #[test]
    fn strips_and_indices() {
        assert_eq!(strip_of(&q(2, 3), 3), 2);
        assert_eq!(strip_of(&q(0, 1), 5), 0);
        assert_eq!(digits_index(&[1, 2], 3), 5);
    }
}
