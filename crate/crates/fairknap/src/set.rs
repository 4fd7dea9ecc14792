//! Compact subsets of a fixed ground set `{0, .., n-1}`.

use crate::error::{Error, Result};

/// A bitset over element ids `0..n`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ElementSet {
    n: usize,
    words: Vec<u64>,
}

impl ElementSet {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut set = Self::empty(n);
        for e in 0..n {
            set.insert(e);
        }
        set
    }

    /// Builds a set from ids, rejecting ids outside the ground set.
    /// Duplicates are tolerated (a set is a set).
    pub fn from_ids(n: usize, ids: &[usize]) -> Result<Self> {
        let mut set = Self::empty(n);
        for &id in ids {
            if id >= n {
                return Err(Error::UnknownElement { id, n });
            }
            set.insert(id);
        }
        Ok(set)
    }

    /// The low `n` bits of `mask` as a set (`n <= 64`).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n <= 64);
        let mut set = Self::empty(n);
        if n > 0 {
            set.words[0] = if n == 64 {
                mask
            } else {
                mask & ((1u64 << n) - 1)
            };
        }
        set
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn contains(&self, e: usize) -> bool {
        debug_assert!(e < self.n);
        self.words[e / 64] >> (e % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, e: usize) {
        debug_assert!(e < self.n);
        self.words[e / 64] |= 1u64 << (e % 64);
    }

    #[inline]
    pub fn remove(&mut self, e: usize) {
        debug_assert!(e < self.n);
        self.words[e / 64] &= !(1u64 << (e % 64));
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    /// Member ids in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|&e| self.contains(e))
    }

    pub fn ids(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn is_subset_of(&self, other: &ElementSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &ElementSet) -> ElementSet {
        debug_assert_eq!(self.n, other.n);
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a | b)
            .collect();
        ElementSet { n: self.n, words }
    }

    /// The 0/1 indicator vector of the set.
    pub fn indicator(&self) -> Vec<f64> {
        (0..self.n)
            .map(|e| if self.contains(e) { 1.0 } else { 0.0 })
            .collect()
    }
}
