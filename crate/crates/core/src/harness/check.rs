//! Property-check suites run by `gna check`.
//!
//! Every suite counts the cases it tried and keeps the smallest failing
//! cases (by input length) as counterexamples.

use std::time::{Duration, Instant};

use itertools::Itertools;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::experiment::{run_experiment, ObservableKind};
use super::random::{random_machine, random_orderings, random_tape};
use crate::error::{Error, Result};
use crate::nda::{encode_tape, from_versatile_shift, nda_step, Nda, Orderings, PhasePoint};
use crate::neural::{na_run, synthesize, NeuralAutomaton, NeuralState};
use crate::observables::{alpha_pi, rho_pi_point, FromFn, Observable, PermutationPair, StepObservableSpec};
use crate::patterns::{
    index_digits, interval_partition, pattern_of, same_orbit, square_partition, PartitionMode, SquareShape,
};
use crate::shift::{initial_tape, vs_run, vs_step, VersatileShift};
use crate::symbols::{
    encode_digits, godel_encode_sequence, recode, ultrametric, Alphabet, DottedSequence, OneSidedSequence,
    Permutation, SymbolOrdering, Word,
};

const KEEP: usize = 5;

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Smallest failing cases first.
    pub counterexamples: Vec<String>,
    pub elapsed: Duration,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub suites: Vec<SuiteResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }

    /// One line per suite, then the counterexamples of failing suites.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            out.push_str(&format!(
                "{} {:<13} {:>8} cases {:>4} failures {:>8.2?}\n",
                if s.passed() { "PASS" } else { "FAIL" },
                s.name,
                s.cases,
                s.failures,
                s.elapsed
            ));
            for c in &s.counterexamples {
                out.push_str(&format!("    counterexample: {c}\n"));
            }
        }
        out
    }
}

#[derive(Default)]
struct Tally {
    cases: usize,
    failures: usize,
    examples: Vec<(usize, String)>,
}

impl Tally {
    fn check(&mut self, ok: bool, size: usize, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.fail(size, describe());
        }
    }

    fn fail(&mut self, size: usize, text: String) {
        self.failures += 1;
        self.examples.push((size, text));
        if self.examples.len() > 4 * KEEP {
            self.trim();
        }
    }

    fn trim(&mut self) {
        // stable: equal sizes keep discovery order
        self.examples.sort_by_key(|(size, _)| *size);
        self.examples.truncate(KEEP);
    }

    fn finish(mut self, name: &str, started: Instant) -> SuiteResult {
        self.trim();
        SuiteResult {
            name: name.to_string(),
            cases: self.cases,
            failures: self.failures,
            counterexamples: self.examples.into_iter().map(|(_, t)| t).collect(),
            elapsed: started.elapsed(),
        }
    }
}

/// Runs the configured suites in order.
pub fn run_checks(cfg: &ExperimentConfig) -> Result<CheckReport> {
    if cfg.check.suites.is_empty() {
        return Err(Error::Config("nothing to check".into()));
    }
    let suites = cfg
        .check
        .suites
        .iter()
        .map(|name| run_suite(name, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport { suites })
}

pub fn run_suite(name: &str, cfg: &ExperimentConfig) -> Result<SuiteResult> {
    let started = Instant::now();
    let tally = match name {
        "ultrametric" => ultrametric_suite(cfg)?,
        "orbits" => orbit_suite()?,
        "group-action" => group_action_suite(cfg)?,
        "partition" => partition_suite(cfg)?,
        "commutation" => commutation_suite(cfg)?,
        "network" => network_suite(cfg)?,
        "invariance" => invariance_suite(cfg)?,
        other => return Err(Error::Config(format!("unknown check suite `{other}`"))),
    };
    Ok(tally.finish(name, started))
}

fn digits_text(d: &[usize]) -> String {
    if d.is_empty() {
        "ε".into()
    } else {
        d.iter().join("")
    }
}

fn words(m: usize, len: usize) -> Vec<Vec<usize>> {
    itertools::repeat_n(0..m, len).multi_cartesian_product().collect()
}

fn floor_scaled(x: &BigRational, m: usize, n: usize) -> BigRational {
    (x * BigRational::from_integer(num_bigint::BigInt::from(m).pow(n as u32))).floor()
}

fn interval_case(
    t: &mut Tally,
    alpha: &Alphabet,
    ord: &SymbolOrdering,
    w: &[usize],
    u: &[usize],
    max_n: usize,
) -> Result<()> {
    let m = alpha.size();
    let p = OneSidedSequence::finite(alpha, ord.word_of(w)?)?;
    let q = OneSidedSequence::finite(alpha, ord.word_of(u)?)?;
    let d = ultrametric(&p, &q)?;
    let (x, y) = (
        godel_encode_sequence(&p, ord)?.into_inner(),
        godel_encode_sequence(&q, ord)?.into_inner(),
    );
    for n in 0..=max_n {
        let bound = BigRational::new(1.into(), num_bigint::BigInt::from(m).pow(n as u32));
        let close = d <= bound;
        let same_interval = floor_scaled(&x, m, n) == floor_scaled(&y, m, n);
        t.check(close == same_interval, w.len() + u.len(), || {
            format!(
                "digits {} vs {} (ordering {:?}), n={n}: d={d}, same interval={same_interval}",
                digits_text(w),
                digits_text(u),
                (0..m).map(|k| ord.digit(&alpha.symbols()[k]).unwrap()).collect::<Vec<_>>()
            )
        });
    }
    Ok(())
}

/// Ultrametric axioms on random eventually periodic sequences, and the
/// equivalence between `d(p, q) ≤ m^-n` and sharing an `m`-adic interval of
/// width `m^-n`: exhaustive over prefixes of length ≤ 4 at `m = 3`, then
/// random extensions.
fn ultrametric_suite(cfg: &ExperimentConfig) -> Result<Tally> {
    let mut t = Tally::default();
    let m = 3;
    let alpha = Alphabet::digits(m, true)?;
    let orderings: Vec<SymbolOrdering> = Permutation::fixing_zero(m)
        .map(|p| SymbolOrdering::from_digits(&alpha, p.image().to_vec()))
        .collect::<Result<_>>()?;
    let all: Vec<Vec<usize>> = (0..=4).flat_map(|len| words(m, len)).collect();
    for ord in &orderings {
        for (w, u) in all.iter().cartesian_product(&all) {
            interval_case(&mut t, &alpha, ord, w, u, 4)?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.check.seed);
    for _ in 0..cfg.check.interval_extensions {
        let ord = &orderings[rng.random_range(0..orderings.len())];
        let mut w: Vec<usize> = (0..rng.random_range(0..=4)).map(|_| rng.random_range(0..m)).collect();
        let mut u: Vec<usize> = if rng.random_bool(0.5) {
            w.clone()
        } else {
            (0..rng.random_range(0..=4)).map(|_| rng.random_range(0..m)).collect()
        };
        w.extend((0..rng.random_range(0..=6)).map(|_| rng.random_range(0..m)));
        u.extend((0..rng.random_range(0..=6)).map(|_| rng.random_range(0..m)));
        interval_case(&mut t, &alpha, ord, &w, &u, 10)?;
    }

    // axioms, with periodic tails as well
    let seq = |rng: &mut ChaCha8Rng| -> Result<(OneSidedSequence, Word)> {
        let sym = |rng: &mut ChaCha8Rng| alpha.symbols()[rng.random_range(0..m)].clone();
        let prefix: Word = (0..rng.random_range(0..=4)).map(|_| sym(rng)).collect();
        let s = if rng.random_bool(0.5) {
            OneSidedSequence::finite(&alpha, prefix)?
        } else {
            let cycle: Word = (0..rng.random_range(1..=3)).map(|_| sym(rng)).collect();
            OneSidedSequence::periodic(&alpha, prefix, cycle)?
        };
        let window = s.take(32);
        Ok((s, window))
    };
    for _ in 0..2000 {
        let (p, pw) = seq(&mut rng)?;
        let (q, qw) = if rng.random_bool(0.2) { (p.clone(), pw.clone()) } else { seq(&mut rng)? };
        let (r, _) = seq(&mut rng)?;
        let pq = ultrametric(&p, &q)?;
        let qp = ultrametric(&q, &p)?;
        let pr = ultrametric(&p, &r)?;
        let rq = ultrametric(&r, &q)?;
        let size = pw.len();
        t.check(pq.is_zero() == (pw == qw), size, || format!("identity fails for {pw} / {qw}"));
        t.check(pq == qp, size, || format!("symmetry fails for {pw} / {qw}"));
        t.check(pq <= pr.clone().max(rq.clone()), size, || {
            format!("strong triangle fails: d(p,q)={pq} > max({pr}, {rq})")
        });
        t.check(pq <= BigRational::one(), size, || format!("d={pq} exceeds 1"));
    }
    Ok(t)
}

/// `same_orbit` against brute-force enumeration of all recodings, for
/// `m ∈ {2, 3}` and every pair of words of length ≤ 5.
fn orbit_suite() -> Result<Tally> {
    let mut t = Tally::default();
    for m in 2..=3 {
        for pinned in [false, true] {
            let perms: Vec<Permutation> = Permutation::group(m, pinned).collect();
            for len in 0..=5 {
                let ws = words(m, len);
                for w in &ws {
                    let images: std::collections::BTreeSet<Vec<usize>> =
                        perms.iter().map(|p| recode(w, p)).collect::<Result<_>>()?;
                    for u in &ws {
                        let fast = same_orbit(w, u, m, pinned);
                        t.check(fast == images.contains(u), len, || {
                            format!(
                                "m={m} pinned={pinned}: {} ~ {} is {fast}, brute force says {}",
                                digits_text(w),
                                digits_text(u),
                                !fast
                            )
                        });
                    }
                }
            }
        }
    }
    Ok(t)
}

fn random_point(rng: &mut ChaCha8Rng) -> PhasePoint {
    let mut c = || BigRational::new(rng.random_range(0..1_000_003i64).into(), 1_000_003i64.into());
    PhasePoint::new(c(), c()).expect("inside the unit square")
}

/// Recoding of words, the rectangle moves `ρ_π` and the pullbacks `α_π`
/// act as groups.
fn group_action_suite(cfg: &ExperimentConfig) -> Result<Tally> {
    let mut t = Tally::default();
    for m in 2..=4 {
        let perms: Vec<Permutation> = Permutation::all(m).collect();
        let id = Permutation::identity(m);
        for len in 0..=5 {
            for w in words(m, len) {
                t.check(recode(&w, &id)? == w, len, || format!("identity moves {}", digits_text(&w)));
                for p in &perms {
                    let pw = recode(&w, p)?;
                    t.check(recode(&pw, &p.inverse())? == w, len, || {
                        format!("inverse of {p} fails on {}", digits_text(&w))
                    });
                    for q in &perms {
                        let lhs = recode(&w, &p.compose(q))?;
                        let rhs = recode(&recode(&w, q)?, p)?;
                        t.check(lhs == rhs, len, || {
                            format!("recode(w, {p}∘{q}) differs from recode(recode(w, {q}), {p}) at {}", digits_text(&w))
                        });
                    }
                }
            }
        }
    }

    // ρ_π on every rectangle corner and centre of a small shape
    let shape = SquareShape::uniform(3, 2, 3);
    let pairs = PermutationPair::all(3, 3);
    let map = square_partition(shape, PartitionMode::Product, true)?;
    for cell in 0..map.cell_count() {
        let (stack, input) = map.cell_intervals(cell);
        let input = input.expect("square");
        let half = BigRational::new(1.into(), 2.into());
        for p in [
            PhasePoint::new(input.lo.clone(), stack.lo.clone())?,
            PhasePoint::new(
                &input.lo + input.width() * &half,
                &stack.lo + stack.width() * &half,
            )?,
        ] {
            let id = rho_pi_point(&p, &PermutationPair::identity(3, 3), shape)?;
            t.check(id == p, 2, || format!("ρ_id moves {}", point_text(&p)));
            for a in &pairs {
                let moved = rho_pi_point(&p, a, shape)?;
                // the image sits at the same offset inside the recoded rectangle
                let (ds, di) = map.corner_digits(cell);
                let want_input = encode_digits(&recode(&di, &a.input)?, 3);
                let want_stack = encode_digits(&recode(&ds, &a.stack)?, 3);
                let ok = moved.y1.value() - &want_input == p.y1.value() - &input.lo
                    && moved.y2.value() - &want_stack == p.y2.value() - &stack.lo;
                t.check(ok, 2, || format!("ρ_{a} is not rigid at {}", point_text(&p)));
                for b in &pairs {
                    let lhs = rho_pi_point(&p, &a.compose(b), shape)?;
                    let rhs = rho_pi_point(&rho_pi_point(&p, b, shape)?, a, shape)?;
                    t.check(lhs == rhs, 2, || {
                        format!("ρ_({a})∘({b}) differs from ρ_{a}∘ρ_{b} at {}", point_text(&p))
                    });
                }
            }
        }
    }

    // the machine's own shape, sampled
    let first = &cfg.encodings[0].1;
    let [l, r] = cfg.observables.step_window;
    let shape = SquareShape {
        m_left: first.m_st(),
        l,
        m_right: first.m_in(),
        r,
    };
    let pairs = PermutationPair::all(first.m_in(), first.m_st());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.check.seed ^ 0x9a);
    let f = FromFn(|x: &NeuralState| x.x[0] + 3.0 * x.x[1]);
    for _ in 0..500 {
        let a = &pairs[rng.random_range(0..pairs.len())];
        let b = &pairs[rng.random_range(0..pairs.len())];
        let p = random_point(&mut rng);
        let lhs = rho_pi_point(&p, &a.compose(b), shape)?;
        let rhs = rho_pi_point(&rho_pi_point(&p, b, shape)?, a, shape)?;
        t.check(lhs == rhs, 2, || format!("ρ composition fails for ({a}), ({b}) at {}", point_text(&p)));
        let back = rho_pi_point(&rho_pi_point(&p, a, shape)?, &a.inverse(), shape)?;
        t.check(back == p, 2, || format!("ρ_({a}) has no inverse at {}", point_text(&p)));

        // pullbacks: α_b(α_a f) = α_(a∘b) f
        let x = NeuralState {
            x: p.to_f64().to_vec(),
            t: 0,
        };
        let nested = alpha_pi(alpha_pi(&f, a, shape)?, b, shape)?.eval(&x);
        let direct = alpha_pi(&f, &a.compose(b), shape)?.eval(&x);
        t.check((nested - direct).abs() <= 1e-12, 2, || {
            format!("α_({b})∘α_({a}) = {nested} but α_(({a})∘({b})) = {direct}")
        });
        let plain = alpha_pi(&f, &PermutationPair::identity(first.m_in(), first.m_st()), shape)?.eval(&x);
        t.check(plain == f.eval(&x), 2, || "α_id changes the observable".into());
    }
    Ok(t)
}

fn point_text(p: &PhasePoint) -> String {
    format!("({}, {})", p.y1, p.y2)
}

/// Partitions are total and disjoint, and two cells share a class exactly
/// when their corner words share a pattern of equality.
fn partition_suite(cfg: &ExperimentConfig) -> Result<Tally> {
    let mut t = Tally::default();
    for m in 2..=4 {
        for l in 1..=4 {
            for pinned in [false, true] {
                let map = interval_partition(m, l, pinned)?;
                let cells = m.pow(l as u32);
                t.check(map.cell_count() == cells, l, || format!("m={m} l={l}: {} cells", map.cell_count()));
                t.check(map.class_sizes().iter().all(|&s| s > 0), l, || format!("m={m} l={l}: empty class"));
                let mut hi = BigRational::zero();
                for k in 0..cells {
                    let (iv, _) = map.cell_intervals(k);
                    t.check(iv.lo == hi, l, || format!("m={m} l={l}: gap or overlap before cell {k}"));
                    hi = iv.hi;
                }
                t.check(hi.is_one(), l, || format!("m={m} l={l}: cells stop at {hi}"));
                for (a, b) in (0..cells).tuple_combinations() {
                    let (da, db) = (index_digits(a, m, l), index_digits(b, m, l));
                    let same = same_orbit(&da, &db, m, pinned);
                    t.check((map.class_of(a) == map.class_of(b)) == same, l, || {
                        format!("m={m} l={l} pinned={pinned}: cells {} and {}", digits_text(&da), digits_text(&db))
                    });
                }
            }
        }
    }
    let example = interval_partition(3, 3, false)?;
    t.check(example.cell_count() == 27 && example.class_count() == 5, 3, || {
        format!("m=3 l=3: {} cells in {} classes", example.cell_count(), example.class_count())
    });
    let small = interval_partition(2, 1, true)?;
    t.check(small.class_count() == 2, 1, || format!("m=2 l=1: {} classes", small.class_count()));

    for (l, r) in [(1, 1), (1, 2), (2, 2), (2, 3)] {
        let shape = SquareShape::uniform(3, l, r);
        for mode in [PartitionMode::Joint, PartitionMode::Product] {
            let map = square_partition(shape, mode, true)?;
            t.check(map.cell_count() == shape.left_cells() * shape.right_cells(), l + r, || {
                format!("{shape:?}: {} cells", map.cell_count())
            });
            for (a, b) in (0..map.cell_count()).tuple_combinations() {
                let ((sa, ia), (sb, ib)) = (map.corner_digits(a), map.corner_digits(b));
                let same = match mode {
                    PartitionMode::Joint => {
                        pattern_of(&[sa.clone(), ia.clone()].concat(), true)
                            == pattern_of(&[sb.clone(), ib.clone()].concat(), true)
                    }
                    PartitionMode::Product => {
                        pattern_of(&sa, true) == pattern_of(&sb, true) && pattern_of(&ia, true) == pattern_of(&ib, true)
                    }
                };
                t.check((map.class_of(a) == map.class_of(b)) == same, l + r, || {
                    format!("{mode} ({l},{r}): cells {a} and {b}")
                });
            }
        }
    }

    // every point of the square lies in exactly one rectangle
    let first = &cfg.encodings[0].1;
    let [l, r] = cfg.observables.step_window;
    let spec = StepObservableSpec::new(first.m_in(), first.m_st(), l, r, cfg.observables.partition_mode()?, cfg.observables.seed)?;
    let map = spec.classes();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.check.seed ^ 0x51);
    for _ in 0..200 {
        let p = random_point(&mut rng);
        let holders: Vec<usize> = (0..map.cell_count())
            .filter(|&k| {
                let (stack, input) = map.cell_intervals(k);
                stack.contains(p.y2.value()) && input.expect("square").contains(p.y1.value())
            })
            .collect();
        let found = spec.rectangle_exact(&p);
        t.check(holders == [found], 2, || format!("{} lies in rectangles {holders:?}, lookup says {found}", point_text(&p)));
    }
    Ok(t)
}

fn commutes(t: &mut Tally, vs: &VersatileShift, nda: &Nda, ord: &Orderings, s: &DottedSequence, context: &str) -> Result<()> {
    let size = s.stack().len() + s.input().len();
    let (next, _) = vs_step(vs, s)?;
    let want = encode_tape(&next, ord)?;
    let p = encode_tape(s, ord)?;
    match nda_step(nda, &p) {
        Ok(got) => t.check(got == want, size, || {
            format!(
                "{context}: tape `{s}` steps to `{next}` = {} but the automaton gives {}",
                point_text(&want),
                point_text(&got)
            )
        }),
        Err(e) => {
            t.cases += 1;
            t.fail(size, format!("{context}: tape `{s}`: {e}"));
        }
    }
    Ok(())
}

/// `encode ∘ vs_step = nda_step ∘ encode` for the configured machine under
/// every encoding, and for random small machines. A configured fault swaps
/// one cell's map for the identity first.
fn commutation_suite(cfg: &ExperimentConfig) -> Result<Tally> {
    let mut t = Tally::default();
    let vs = &cfg.machine;
    let trace = vs_run(vs, &initial_tape(&cfg.grammar, &cfg.sentence), cfg.max_macro_steps.max(64))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.check.seed);
    let extra: Vec<DottedSequence> = (0..cfg.check.tapes_per_machine).map(|_| random_tape(&mut rng, vs)).collect();
    for (name, ord) in &cfg.encodings {
        let mut nda = from_versatile_shift(vs, ord)?;
        if let Some(f) = cfg.check.fault.as_ref().filter(|f| f.encoding == *name) {
            let [i, j] = f.cell;
            if i >= nda.input_strips() || j >= nda.stack_strips() {
                return Err(Error::Config(format!("fault cell [{i}, {j}] is outside the partition")));
            }
            nda.set_cell_map(i, j, [BigRational::zero(), BigRational::zero()], [BigRational::one(), BigRational::one()]);
        }
        for s in trace.states().chain(&extra) {
            commutes(&mut t, vs, &nda, ord, s, name)?;
        }
    }
    for k in 0..cfg.check.random_machines {
        let vs = random_machine(&mut rng);
        let ord = random_orderings(&mut rng, &vs);
        let nda = from_versatile_shift(&vs, &ord)?;
        for _ in 0..cfg.check.tapes_per_machine {
            let s = random_tape(&mut rng, &vs);
            commutes(&mut t, &vs, &nda, &ord, &s, &format!("random machine {k}"))?;
        }
    }
    Ok(t)
}

/// How a run is held against the exact automaton.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Oracle {
    /// The whole trajectory stays within tolerance of the exact orbit.
    Trajectory,
    /// Each macro step, started from the exact orbit point, lands within
    /// tolerance of the next one. Used where the maps expand, so that the
    /// rounding of the start point alone grows past any fixed tolerance.
    Stepwise,
}

fn network_run_checks(
    t: &mut Tally,
    na: &NeuralAutomaton,
    p0: &PhasePoint,
    steps: usize,
    tol: f64,
    oracle: Oracle,
    context: &str,
) -> Result<()> {
    let run = na.run(p0, steps, tol)?;
    match oracle {
        Oracle::Trajectory => t.check(!run.comparison.diverged(), 0, || {
            format!(
                "{context}: macro step {:?} deviates by {} from the exact orbit",
                run.comparison.first_divergence, run.comparison.max_deviation
            )
        }),
        Oracle::Stepwise => {
            let orbit = &run.comparison.nda_orbit;
            for (k, pair) in orbit.windows(2).enumerate() {
                let one = na.run(&pair[0], 1, tol)?;
                t.check(!one.comparison.diverged(), 0, || {
                    format!(
                        "{context}: macro step {k} from the exact point deviates by {}",
                        one.comparison.max_deviation
                    )
                });
            }
        }
    }
    for (k, x) in run.trajectory.bsl_phase_states().enumerate() {
        let active = na.spec.active_select_units(x);
        t.check(active.len() == 1, 0, || format!("{context}: macro step {k} has select units {active:?} active"));
    }
    for x in &run.trajectory.states {
        let bad = x.x.iter().position(|v| !(0.0..=1.0).contains(v));
        t.check(bad.is_none(), 0, || format!("{context}: unit {bad:?} leaves [0, 1] at micro step {}", x.t));
    }
    let again = na_run(&na.spec, &NeuralState::embed(&na.spec, p0), steps)?;
    t.check(again == run.trajectory, 0, || format!("{context}: two runs differ"));
    Ok(())
}

/// Network structure, one-hot branch selection, state bounds, determinism
/// and agreement with the exact orbit.
fn network_suite(cfg: &ExperimentConfig) -> Result<Tally> {
    let mut t = Tally::default();
    let vs = &cfg.machine;
    let s0 = initial_tape(&cfg.grammar, &cfg.sentence);
    for (name, ord) in &cfg.encodings {
        let nda = from_versatile_shift(vs, ord)?;
        let spec = synthesize(&nda)?;
        t.check(spec.check_structure().is_ok(), 0, || format!("{name}: {:?}", spec.check_structure()));
        let want = 4 + nda.input_strips() + nda.stack_strips() + 4 * nda.cells().len();
        t.check(spec.n() == want, 0, || format!("{name}: {} units, expected {want}", spec.n()));
        let na = NeuralAutomaton { spec, nda };
        let p0 = encode_tape(&s0, ord)?;
        network_run_checks(&mut t, &na, &p0, cfg.max_macro_steps, cfg.tolerances.na_oracle, Oracle::Trajectory, name)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.check.seed ^ 0x4e);
    for k in 0..cfg.check.random_machines {
        let vs = random_machine(&mut rng);
        let ord = random_orderings(&mut rng, &vs);
        let na = NeuralAutomaton::new(from_versatile_shift(&vs, &ord)?)?;
        for _ in 0..5 {
            let s = random_tape(&mut rng, &vs);
            let context = format!("random machine {k}, tape `{s}`");
            let p0 = encode_tape(&s, &ord)?;
            network_run_checks(&mut t, &na, &p0, 20, cfg.tolerances.na_oracle, Oracle::Stepwise, &context)?;
        }
    }
    Ok(t)
}

fn invariance_on(t: &mut Tally, spec: &StepObservableSpec) -> Result<()> {
    let shape = spec.shape();
    let map = spec.classes();
    let pairs: Vec<PermutationPair> = PermutationPair::all(shape.m_right, shape.m_left)
        .into_iter()
        .filter(|p| spec.mode() == PartitionMode::Product || p.input == p.stack)
        .collect();
    let half = BigRational::new(1.into(), 2.into());
    for cell in 0..map.cell_count() {
        let (stack, input) = map.cell_intervals(cell);
        let input = input.expect("square");
        let centre = PhasePoint::new(&input.lo + input.width() * &half, &stack.lo + stack.width() * &half)?;
        for p in [PhasePoint::new(input.lo.clone(), stack.lo.clone())?, centre] {
            let f = spec.value_exact(&p);
            for pi in &pairs {
                let g = spec.value_exact(&rho_pi_point(&p, pi, shape)?);
                t.check(f == g, 2, || {
                    format!("{} {shape:?}: f = {f} at {} but {g} after ρ_({pi})", spec.mode(), point_text(&p))
                });
            }
        }
    }
    Ok(())
}

/// `f ∘ ρ_π = f` on every rectangle for every admissible recoding, and the
/// configured run gives identical step series under all encodings.
fn invariance_suite(cfg: &ExperimentConfig) -> Result<Tally> {
    let mut t = Tally::default();
    for mode in [PartitionMode::Joint, PartitionMode::Product] {
        invariance_on(&mut t, &StepObservableSpec::new(3, 3, 2, 3, mode, cfg.observables.seed)?)?;
    }
    let first = &cfg.encodings[0].1;
    let [l, r] = cfg.observables.step_window;
    let mode = cfg.observables.partition_mode()?;
    let spec = StepObservableSpec::new(first.m_in(), first.m_st(), l, r, mode, cfg.observables.seed)?;
    invariance_on(&mut t, &spec)?;

    let report = run_experiment(cfg)?;
    for v in report.verdicts.iter().filter(|v| v.observable == ObservableKind::Step) {
        t.check(v.invariant, 0, || {
            format!(
                "step series of `{}` and `{}` differ by {}",
                v.encoding_a, v.encoding_b, v.max_deviation
            )
        });
    }
    Ok(t)
}
