//! Macroscopic observables of network states and the recoding symmetry.
//!
//! The step observable is constant on the classes of a square pattern
//! partition of the MCL plane, so it cannot tell two encodings apart. The
//! Amari mean activity, harmony and dissimilarity have no such guarantee.

use std::fmt;

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::nda::{strip_of, PhasePoint};
use crate::neural::{mcl_projection, NetworkSpec, NeuralState};
use crate::patterns::{digits_index, index_digits, square_partition, PartitionMode, PatternClassMap, SquareCell, SquareShape};
use crate::symbols::{recode, Permutation};

/// A real-valued function of network states.
pub trait Observable {
    fn eval(&self, x: &NeuralState) -> f64;
}

impl<O: Observable + ?Sized> Observable for &O {
    fn eval(&self, x: &NeuralState) -> f64 {
        (**self).eval(x)
    }
}

/// Wraps a closure as an observable.
#[derive(Clone, Copy, Debug)]
pub struct FromFn<F>(pub F);

impl<F: Fn(&NeuralState) -> f64> Observable for FromFn<F> {
    fn eval(&self, x: &NeuralState) -> f64 {
        (self.0)(x)
    }
}

/// A recoding of both sides, each fixing the blank digit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PermutationPair {
    /// Acts on input digits (`y1`).
    pub input: Permutation,
    /// Acts on stack digits (`y2`).
    pub stack: Permutation,
}

impl PermutationPair {
    pub fn new(input: Permutation, stack: Permutation) -> Result<Self> {
        if !input.fixes_zero() || !stack.fixes_zero() {
            return Err(domain("recodings must keep the blank on digit 0"));
        }
        Ok(PermutationPair { input, stack })
    }

    pub fn identity(m_in: usize, m_st: usize) -> Self {
        PermutationPair {
            input: Permutation::identity(m_in),
            stack: Permutation::identity(m_st),
        }
    }

    /// Every pair in `S_{m_in - 1} × S_{m_st - 1}`.
    pub fn all(m_in: usize, m_st: usize) -> Vec<Self> {
        let stacks: Vec<Permutation> = Permutation::fixing_zero(m_st).collect();
        Permutation::fixing_zero(m_in)
            .flat_map(|input| {
                stacks.iter().map(move |stack| PermutationPair {
                    input: input.clone(),
                    stack: stack.clone(),
                })
            })
            .collect()
    }

    /// `self ∘ other` on each side.
    pub fn compose(&self, other: &PermutationPair) -> PermutationPair {
        PermutationPair {
            input: self.input.compose(&other.input),
            stack: self.stack.compose(&other.stack),
        }
    }

    pub fn inverse(&self) -> PermutationPair {
        PermutationPair {
            input: self.input.inverse(),
            stack: self.stack.inverse(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.input.is_identity() && self.stack.is_identity()
    }
}

impl fmt::Display for PermutationPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} × {}", self.input, self.stack)
    }
}

/// Offset used when locating a floating-point coordinate in its strip.
pub const LOOKUP_MARGIN: f64 = 1e-12;

fn float_strip(y: f64, cells: usize) -> usize {
    (((y + LOOKUP_MARGIN) * cells as f64).floor().max(0.0) as usize).min(cells - 1)
}

/// The step observable: one coefficient per pattern class of the square
/// partition at window `(l, r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepObservableSpec {
    classes: PatternClassMap,
    coefficients: Vec<f64>,
    seed: u64,
}

/// Grid the coefficients are drawn from has at least this many points.
const COEFFICIENT_GRID: usize = 1000;

impl StepObservableSpec {
    /// Partition of the stack window `l` (alphabet `m_st`) against the input
    /// window `r` (alphabet `m_in`), blank pinned, coefficients drawn from a
    /// seeded grid without repetition.
    pub fn new(m_in: usize, m_st: usize, l: usize, r: usize, mode: PartitionMode, seed: u64) -> Result<Self> {
        let shape = SquareShape {
            m_left: m_st,
            l,
            m_right: m_in,
            r,
        };
        let classes = square_partition(shape, mode, true)?;
        let s = classes.class_count();
        let grid = COEFFICIENT_GRID.max(4 * s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefficients = rand::seq::index::sample(&mut rng, grid, s)
            .into_iter()
            .map(|k| k as f64 / grid as f64)
            .collect();
        Ok(StepObservableSpec {
            classes,
            coefficients,
            seed,
        })
    }

    pub fn shape(&self) -> SquareShape {
        self.classes.shape().expect("square partition")
    }

    pub fn mode(&self) -> PartitionMode {
        match self.classes.geometry() {
            crate::patterns::Geometry::Square { mode, .. } => mode,
            crate::patterns::Geometry::Interval { .. } => unreachable!("square partition"),
        }
    }

    pub fn classes(&self) -> &PatternClassMap {
        &self.classes
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Rectangle of an MCL pair.
    pub fn rectangle(&self, [y1, y2]: [f64; 2]) -> usize {
        let shape = self.shape();
        self.classes.square_index(SquareCell {
            left: float_strip(y2, shape.left_cells()),
            right: float_strip(y1, shape.right_cells()),
        })
    }

    /// Rectangle of an exact point.
    pub fn rectangle_exact(&self, p: &PhasePoint) -> usize {
        let shape = self.shape();
        self.classes.square_index(SquareCell {
            left: strip_of(p.y2.value(), shape.left_cells()),
            right: strip_of(p.y1.value(), shape.right_cells()),
        })
    }

    pub fn value_at(&self, y: [f64; 2]) -> f64 {
        self.coefficients[self.classes.class_of(self.rectangle(y))]
    }

    pub fn value_exact(&self, p: &PhasePoint) -> f64 {
        self.coefficients[self.classes.class_of(self.rectangle_exact(p))]
    }
}

impl Observable for StepObservableSpec {
    fn eval(&self, x: &NeuralState) -> f64 {
        step_observable(self, x)
    }
}

/// `f(x) = c_k` for the class `k` of the rectangle holding the MCL pair.
pub fn step_observable(spec: &StepObservableSpec, x: &NeuralState) -> f64 {
    spec.value_at(mcl_projection(x))
}

/// Mean activation `(1/n) Σ x_i`.
pub fn amari(x: &NeuralState) -> f64 {
    x.x.iter().sum::<f64>() / x.x.len() as f64
}

/// `xᵀ W x`.
pub fn harmony(x: &NeuralState, spec: &NetworkSpec) -> Result<f64> {
    let n = spec.n();
    if x.x.len() != n {
        return Err(domain(format!("state has {} components, the weights {n}", x.x.len())));
    }
    let mut h = 0.0;
    for (i, xi) in x.x.iter().enumerate() {
        if *xi == 0.0 {
            continue;
        }
        let row = &spec.weights()[i * n..(i + 1) * n];
        h += xi * row.iter().zip(&x.x).map(|(w, xj)| w * xj).sum::<f64>();
    }
    Ok(h)
}

/// `1 - cos(x_t, x_prev)`.
pub fn dissimilarity(x_t: &NeuralState, x_prev: &NeuralState) -> Result<f64> {
    if x_t.x.len() != x_prev.x.len() {
        return Err(domain("states of different dimension"));
    }
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let (a, b) = (norm(&x_t.x), norm(&x_prev.x));
    if a == 0.0 || b == 0.0 {
        return Err(Error::UndefinedInput("dissimilarity of a zero state".into()));
    }
    let dot: f64 = x_t.x.iter().zip(&x_prev.x).map(|(p, q)| p * q).sum();
    Ok(1.0 - dot / (a * b))
}

fn check_pair(pi: &PermutationPair, shape: SquareShape) -> Result<()> {
    if pi.input.degree() != shape.m_right || pi.stack.degree() != shape.m_left {
        return Err(domain(format!(
            "recoding of degrees ({}, {}) on alphabets ({}, {})",
            pi.input.degree(),
            pi.stack.degree(),
            shape.m_right,
            shape.m_left
        )));
    }
    if !pi.input.fixes_zero() || !pi.stack.fixes_zero() {
        return Err(domain("recodings must keep the blank on digit 0"));
    }
    Ok(())
}

/// Strip index after recoding the corner word of strip `k`.
fn moved_strip(k: usize, m: usize, len: usize, p: &Permutation) -> usize {
    let digits = recode(&index_digits(k, m, len), p).expect("degree checked");
    digits_index(&digits, m)
}

/// Rigid move of an exact point to the rectangle whose corner words are the
/// recoded corner words of its own rectangle.
pub fn rho_pi_point(p: &PhasePoint, pi: &PermutationPair, shape: SquareShape) -> Result<PhasePoint> {
    check_pair(pi, shape)?;
    let shift = |y: &BigRational, m: usize, len: usize, perm: &Permutation| {
        let cells = m.pow(len as u32);
        let k = strip_of(y, cells);
        let k2 = moved_strip(k, m, len, perm);
        y + BigRational::new((k2 as i64 - k as i64).into(), (cells as i64).into())
    };
    PhasePoint::new(
        shift(p.y1.value(), shape.m_right, shape.r, &pi.input),
        shift(p.y2.value(), shape.m_left, shape.l, &pi.stack),
    )
}

/// [`rho_pi_point`] on a network state; non-MCL units are left alone.
pub fn rho_pi(x: &NeuralState, pi: &PermutationPair, shape: SquareShape) -> Result<NeuralState> {
    check_pair(pi, shape)?;
    let shift = |y: f64, m: usize, len: usize, perm: &Permutation| {
        let cells = m.pow(len as u32);
        let k = float_strip(y, cells);
        let k2 = moved_strip(k, m, len, perm);
        y + (k2 as f64 - k as f64) / cells as f64
    };
    let mut out = x.clone();
    out.x[0] = shift(x.x[0], shape.m_right, shape.r, &pi.input);
    out.x[1] = shift(x.x[1], shape.m_left, shape.l, &pi.stack);
    Ok(out)
}

/// `α_π(f) = f ∘ ρ_π`.
#[derive(Clone, Debug)]
pub struct Pullback<O> {
    f: O,
    pi: PermutationPair,
    shape: SquareShape,
}

impl<O: Observable> Observable for Pullback<O> {
    fn eval(&self, x: &NeuralState) -> f64 {
        let moved = rho_pi(x, &self.pi, self.shape).expect("recoding checked in alpha_pi");
        self.f.eval(&moved)
    }
}

pub fn alpha_pi<O: Observable>(f: O, pi: &PermutationPair, shape: SquareShape) -> Result<Pullback<O>> {
    check_pair(pi, shape)?;
    Ok(Pullback {
        f,
        pi: pi.clone(),
        shape,
    })
}
