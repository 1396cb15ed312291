use std::fmt;

use itertools::Itertools;

use crate::error::{domain, Result};

/// A permutation of `{0, …, m-1}`, stored as its image list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let m = image.len();
        let mut seen = vec![false; m];
        for &x in &image {
            if x >= m || std::mem::replace(&mut seen[x], true) {
                return Err(domain(format!("{image:?} is not a permutation of 0..{m}")));
            }
        }
        Ok(Permutation(image))
    }

    pub fn identity(m: usize) -> Self {
        Permutation((0..m).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree(), "composing permutations of different degree");
        Permutation(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.degree()];
        for (x, &y) in self.0.iter().enumerate() {
            inv[y] = x;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(x, &y)| x == y)
    }

    pub fn fixes_zero(&self) -> bool {
        self.0.first().is_none_or(|&y| y == 0)
    }

    /// All of `S_m` in lexicographic order.
    pub fn all(m: usize) -> impl Iterator<Item = Permutation> {
        (0..m).permutations(m).map(Permutation)
    }

    /// The stabiliser of `0` in `S_m` (a copy of `S_{m-1}`), lexicographic.
    pub fn fixing_zero(m: usize) -> impl Iterator<Item = Permutation> {
        (1..m).permutations(m.saturating_sub(1)).map(|tail| {
            let mut image = Vec::with_capacity(tail.len() + 1);
            image.push(0);
            image.extend(tail);
            Permutation(image)
        })
    }

    /// Either [`all`](Self::all) or [`fixing_zero`](Self::fixing_zero).
    pub fn group(m: usize, blank_pinned: bool) -> Box<dyn Iterator<Item = Permutation>> {
        if blank_pinned {
            Box::new(Self::fixing_zero(m))
        } else {
            Box::new(Self::all(m))
        }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().join(" "))
    }
}

/// Applies `π` to every digit of `digits` (the tree automorphism `g_π`).
pub fn recode(digits: &[usize], pi: &Permutation) -> Result<Vec<usize>> {
    digits
        .iter()
        .map(|&d| {
            if d < pi.degree() {
                Ok(pi.apply(d))
            } else {
                Err(domain(format!("digit {d} out of range for a permutation of degree {}", pi.degree())))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        assert!(Permutation::new(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn recode_example() {
        let pi = Permutation::new(vec![1, 2, 0]).unwrap();
        assert_eq!(recode(&[0, 0, 1], &pi).unwrap(), vec![1, 1, 2]);
        assert_eq!(recode(&[2, 1], &Permutation::identity(3)).unwrap(), vec![2, 1]);
        assert!(recode(&[3], &pi).is_err());
    }

    #[test]
    fn group_sizes() {
        assert_eq!(Permutation::all(4).count(), 24);
        assert_eq!(Permutation::fixing_zero(4).count(), 6);
        assert!(Permutation::fixing_zero(5).all(|p| p.fixes_zero()));
        assert_eq!(Permutation::fixing_zero(1).count(), 1);
    }

    #[test]
    fn group_action_laws_exhaustive() {
        // identity and composition laws for m <= 4, |w| <= 5
        for m in 1..=4 {
            let perms: Vec<_> = Permutation::all(m).collect();
            for len in 0..=5 {
                for w in itertools::repeat_n(0..m, len).multi_cartesian_product() {
                    assert_eq!(recode(&w, &Permutation::identity(m)).unwrap(), w);
                    for p in &perms {
                        let pw = recode(&w, p).unwrap();
                        assert_eq!(recode(&pw, &p.inverse()).unwrap(), w);
                        for s in &perms {
                            assert_eq!(
                                recode(&w, &p.compose(s)).unwrap(),
                                recode(&recode(&w, s).unwrap(), p).unwrap()
                            );
                        }
                    }
                }
            }
        }
    }
}
