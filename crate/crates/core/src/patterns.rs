//! Patterns of equality and the invariant partitions they induce.
//!
//! Two digit words lie in the same recoding orbit exactly when they have the
//! same pattern of equality (and, with a pinned blank, carry the digit 0 at
//! the same positions). Grouping the cylinder cells of the interval or the
//! unit square by pattern gives partitions that no recoding can mix.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::Hash;

use itertools::Itertools;

use crate::error::{domain, Error, Result};
use crate::symbols::{encode_digits, inv_pow, Interval};

/// Largest number of cells a partition may enumerate by default.
pub const DEFAULT_CELL_LIMIT: u128 = 1 << 22;

/// Where the digit 0 sits in a pattern, when the blank is pinned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ZeroClass {
    /// Not blank-pinned: 0 is an ordinary digit.
    Untracked,
    /// Blank-pinned, and no position carries 0.
    Absent,
    /// Blank-pinned; the block with this index carries 0.
    Block(usize),
}

/// A set partition of the positions `{1, …, l}` of a word, grouping equal
/// symbols.
///
/// Stored as a restricted growth string: position `k` gets the index of its
/// block, blocks numbered by first occurrence. That is the same as listing
/// blocks sorted by their smallest element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EqualityPattern {
    labels: Vec<usize>,
    zero: ZeroClass,
}

impl EqualityPattern {
    /// The pattern of `word`. With `zero = Some(z)` the block holding `z`
    /// is flagged.
    pub fn of<T: PartialEq>(word: &[T], zero: Option<&T>) -> Self {
        let mut reps: Vec<&T> = Vec::new();
        let labels = word
            .iter()
            .map(|s| match reps.iter().position(|r| *r == s) {
                Some(k) => k,
                None => {
                    reps.push(s);
                    reps.len() - 1
                }
            })
            .collect();
        let zero = match zero {
            None => ZeroClass::Untracked,
            Some(z) => reps
                .iter()
                .position(|r| *r == z)
                .map_or(ZeroClass::Absent, ZeroClass::Block),
        };
        EqualityPattern { labels, zero }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn block_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |&b| b + 1)
    }

    /// Blocks of 1-based positions, sorted by smallest element.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.block_count()];
        for (k, &b) in self.labels.iter().enumerate() {
            blocks[b].push(k + 1);
        }
        blocks
    }

    pub fn zero_class(&self) -> ZeroClass {
        self.zero
    }

    /// Block index of each position.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

impl fmt::Display for EqualityPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks = self
            .blocks()
            .iter()
            .map(|b| format!("{{{}}}", b.iter().join(",")))
            .join(",");
        write!(f, "{{{blocks}}}")?;
        match self.zero {
            ZeroClass::Untracked => Ok(()),
            ZeroClass::Absent => write!(f, " zero:none"),
            ZeroClass::Block(b) => write!(f, " zero:{}", b + 1),
        }
    }
}

/// Pattern of a digit word; with `blank_pinned` the positions of 0 are
/// tracked.
pub fn pattern_of(digits: &[usize], blank_pinned: bool) -> EqualityPattern {
    EqualityPattern::of(digits, blank_pinned.then_some(&0))
}

/// Whether some permitted recoding maps `w` to `u`. Permitted recodings are
/// all of `S_m`, or those fixing 0 when `blank_pinned`.
pub fn same_orbit(w: &[usize], u: &[usize], m: usize, blank_pinned: bool) -> bool {
    w.len() == u.len()
        && w.iter().chain(u).all(|&d| d < m)
        && pattern_of(w, blank_pinned) == pattern_of(u, blank_pinned)
}

/// All images of `w` under permitted recodings, sorted.
///
/// Built from the pattern directly: each block gets a distinct digit, with
/// the zero block (if any) held at 0 and the others kept off 0 when the
/// blank is pinned.
pub fn orbit(w: &[usize], m: usize, blank_pinned: bool) -> Result<BTreeSet<Vec<usize>>> {
    if let Some(&d) = w.iter().find(|&&d| d >= m) {
        return Err(domain(format!("digit {d} out of range 0..{m}")));
    }
    let pattern = pattern_of(w, blank_pinned);
    let free_blocks: Vec<usize> = (0..pattern.block_count())
        .filter(|&b| pattern.zero != ZeroClass::Block(b))
        .collect();
    let values: Vec<usize> = if blank_pinned { (1..m).collect() } else { (0..m).collect() };
    let mut out = BTreeSet::new();
    for choice in values.iter().copied().permutations(free_blocks.len()) {
        let mut value_of = vec![0; pattern.block_count()];
        for (&b, v) in free_blocks.iter().zip(choice) {
            value_of[b] = v;
        }
        out.insert(pattern.labels.iter().map(|&b| value_of[b]).collect());
    }
    Ok(out)
}

/// Side lengths and alphabet sizes of a square partition. The left side is
/// the stack (read away from the dot), the right side the input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SquareShape {
    pub m_left: usize,
    pub l: usize,
    pub m_right: usize,
    pub r: usize,
}

impl SquareShape {
    pub fn uniform(m: usize, l: usize, r: usize) -> Self {
        SquareShape { m_left: m, l, m_right: m, r }
    }

    pub fn left_cells(&self) -> usize {
        self.m_left.pow(self.l as u32)
    }

    pub fn right_cells(&self) -> usize {
        self.m_right.pow(self.r as u32)
    }
}

/// How the two sides of a square cell are compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PartitionMode {
    /// One shared permutation acts on both sides: compare the pattern of the
    /// concatenated corner word.
    Joint,
    /// Each side is recoded independently: compare the pair of patterns.
    Product,
}

impl std::str::FromStr for PartitionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(PartitionMode::Joint),
            "product" => Ok(PartitionMode::Product),
            other => Err(domain(format!("unknown partition mode `{other}`"))),
        }
    }
}

impl fmt::Display for PartitionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartitionMode::Joint => "joint",
            PartitionMode::Product => "product",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    Interval { m: usize, l: usize },
    Square { shape: SquareShape, mode: PartitionMode },
}

/// Class assignment for every cell of an interval or square partition.
///
/// Class ids are contiguous and numbered by the smallest cell index in each
/// class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternClassMap {
    geometry: Geometry,
    blank_pinned: bool,
    assignment: Vec<usize>,
    class_count: usize,
}

/// Base-`m` digits of `index`, most significant first, `len` digits.
pub fn index_digits(mut index: usize, m: usize, len: usize) -> Vec<usize> {
    let mut digits = vec![0; len];
    for slot in digits.iter_mut().rev() {
        *slot = index % m;
        index /= m;
    }
    digits
}

/// Inverse of [`index_digits`].
pub fn digits_index(digits: &[usize], m: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * m + d)
}

fn guard(cells: u128, limit: u128) -> Result<()> {
    if cells > limit {
        Err(Error::ResourceLimit { cells, limit })
    } else {
        Ok(())
    }
}

fn cell_count(m: usize, len: usize) -> u128 {
    (m as u128).checked_pow(len as u32).unwrap_or(u128::MAX)
}

fn assign<K: Hash + Eq>(keys: impl Iterator<Item = K>) -> (Vec<usize>, usize) {
    let mut ids: HashMap<K, usize> = HashMap::new();
    let assignment = keys
        .map(|k| {
            let next = ids.len();
            *ids.entry(k).or_insert(next)
        })
        .collect();
    (assignment, ids.len())
}

/// Classes of the `m^l` cylinder cells `[k/m^l, (k+1)/m^l)`.
pub fn interval_partition(m: usize, l: usize, blank_pinned: bool) -> Result<PatternClassMap> {
    interval_partition_bounded(m, l, blank_pinned, DEFAULT_CELL_LIMIT)
}

pub fn interval_partition_bounded(
    m: usize,
    l: usize,
    blank_pinned: bool,
    max_cells: u128,
) -> Result<PatternClassMap> {
    if m < 2 || l < 1 {
        return Err(domain(format!("interval partition needs m >= 2 and l >= 1 (m={m}, l={l})")));
    }
    guard(cell_count(m, l), max_cells)?;
    let cells = m.pow(l as u32);
    let (assignment, class_count) =
        assign((0..cells).map(|k| pattern_of(&index_digits(k, m, l), blank_pinned)));
    Ok(PatternClassMap {
        geometry: Geometry::Interval { m, l },
        blank_pinned,
        assignment,
        class_count,
    })
}

/// Classes of the `m_left^l × m_right^r` rectangles of the unit square.
pub fn square_partition(
    shape: SquareShape,
    mode: PartitionMode,
    blank_pinned: bool,
) -> Result<PatternClassMap> {
    square_partition_bounded(shape, mode, blank_pinned, DEFAULT_CELL_LIMIT)
}

pub fn square_partition_bounded(
    shape: SquareShape,
    mode: PartitionMode,
    blank_pinned: bool,
    max_cells: u128,
) -> Result<PatternClassMap> {
    let SquareShape { m_left, l, m_right, r } = shape;
    if m_left < 2 || m_right < 2 || l < 1 || r < 1 {
        return Err(domain(format!(
            "square partition needs alphabet sizes >= 2 and window lengths >= 1 ({shape:?})"
        )));
    }
    if mode == PartitionMode::Joint && m_left != m_right {
        return Err(domain(
            "joint mode shares one permutation and needs equal alphabet sizes on both sides",
        ));
    }
    guard(
        cell_count(m_left, l).saturating_mul(cell_count(m_right, r)),
        max_cells,
    )?;
    let rights = shape.right_cells();
    let cells = shape.left_cells() * rights;
    let corner = |k: usize| {
        (
            index_digits(k / rights, m_left, l),
            index_digits(k % rights, m_right, r),
        )
    };
    let (assignment, class_count) = match mode {
        PartitionMode::Joint => assign((0..cells).map(|k| {
            let (left, right) = corner(k);
            let joined: Vec<usize> = left.into_iter().chain(right).collect();
            pattern_of(&joined, blank_pinned)
        })),
        PartitionMode::Product => assign((0..cells).map(|k| {
            let (left, right) = corner(k);
            (pattern_of(&left, blank_pinned), pattern_of(&right, blank_pinned))
        })),
    };
    Ok(PatternClassMap {
        geometry: Geometry::Square { shape, mode },
        blank_pinned,
        assignment,
        class_count,
    })
}

/// A cell of a square partition: left (stack) and right (input) indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareCell {
    pub left: usize,
    pub right: usize,
}

impl PatternClassMap {
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn blank_pinned(&self) -> bool {
        self.blank_pinned
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn cell_count(&self) -> usize {
        self.assignment.len()
    }

    /// Class id of each cell, by linear cell index.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn class_of(&self, cell: usize) -> usize {
        self.assignment[cell]
    }

    pub fn members(&self, class: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&k| self.assignment[k] == class)
            .collect()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.class_count];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    /// Square shape, if this is a square partition.
    pub fn shape(&self) -> Option<SquareShape> {
        match self.geometry {
            Geometry::Square { shape, .. } => Some(shape),
            Geometry::Interval { .. } => None,
        }
    }

    /// Linear index of a square cell.
    pub fn square_index(&self, cell: SquareCell) -> usize {
        let shape = self.shape().expect("square partition");
        cell.left * shape.right_cells() + cell.right
    }

    pub fn square_cell(&self, index: usize) -> SquareCell {
        let shape = self.shape().expect("square partition");
        SquareCell {
            left: index / shape.right_cells(),
            right: index % shape.right_cells(),
        }
    }

    /// Corner digits of a cell; the second word is empty for interval maps.
    pub fn corner_digits(&self, index: usize) -> (Vec<usize>, Vec<usize>) {
        match self.geometry {
            Geometry::Interval { m, l } => (index_digits(index, m, l), Vec::new()),
            Geometry::Square { shape, .. } => {
                let c = self.square_cell(index);
                (
                    index_digits(c.left, shape.m_left, shape.l),
                    index_digits(c.right, shape.m_right, shape.r),
                )
            }
        }
    }

    /// The cell's extent: one interval for interval maps, `(left, right)`
    /// intervals for square maps.
    pub fn cell_intervals(&self, index: usize) -> (Interval, Option<Interval>) {
        let side = |digits: &[usize], m: usize| {
            let lo = encode_digits(digits, m);
            let hi = &lo + inv_pow(m, digits.len());
            Interval { lo, hi }
        };
        let (a, b) = self.corner_digits(index);
        match self.geometry {
            Geometry::Interval { m, .. } => (side(&a, m), None),
            Geometry::Square { shape, .. } => {
                (side(&a, shape.m_left), Some(side(&b, shape.m_right)))
            }
        }
    }
}
