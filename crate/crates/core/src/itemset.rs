//! Subsets of the ground set `[n]` as fixed-width bitmasks.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Hard cap on exhaustive subset enumeration (2^24 masks).
pub const ENUM_CAP: usize = 24;

/// A subset of `{0, .., n-1}`. No bit at position `>= n` is ever set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ItemSet {
    n: usize,
    words: Vec<u64>,
}

impl ItemSet {
    pub fn empty(n: usize) -> Self {
        ItemSet {
            n,
            words: vec![0; n.div_ceil(64).max(1)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = ItemSet::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    pub fn singleton(n: usize, i: usize) -> Self {
        let mut s = ItemSet::empty(n);
        s.insert(i);
        s
    }

    /// Builds from a plain mask; requires `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64, "from_mask requires n <= 64");
        debug_assert!(n == 64 || mask < (1u64 << n), "mask has bits beyond n");
        ItemSet {
            n,
            words: vec![mask],
        }
    }

    /// Builds from 0-based indices, validating bounds.
    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut s = ItemSet::empty(n);
        for &i in indices {
            if i >= n {
                return Err(Error::Dimension {
                    context: "item index out of ground set",
                    expected: n,
                    got: i,
                });
            }
            s.insert(i);
        }
        Ok(s)
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.n, "item {i} out of ground set 0..{}", self.n);
        self.words[i / 64] |= 1u64 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.n {
            self.words[i / 64] &= !(1u64 << (i % 64));
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.words[i / 64] & (1u64 << (i % 64)) != 0
    }

    pub fn with(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.insert(i);
        s
    }

    pub fn without(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.remove(i);
        s
    }

    pub fn intersection_len(&self, other: &ItemSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset_of(&self, other: &ItemSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, w)| {
            let mut w = *w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// The mask as a `u64`; requires `n <= 64`.
    pub fn as_mask(&self) -> u64 {
        assert!(self.n <= 64);
        self.words[0]
    }

    /// Numeric order of the underlying bitmask (used for deterministic ties).
    pub fn mask_cmp(&self, other: &ItemSet) -> Ordering {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter().zip(&other.words).rev() {
            match a.cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }

    /// Guards exhaustive 2^n work.
    pub fn check_enum_cap(n: usize, what: &'static str) -> Result<()> {
        if n > ENUM_CAP {
            Err(Error::CapExceeded {
                what,
                limit: ENUM_CAP,
                got: n,
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}/{}", self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_and_membership() {
        let s = ItemSet::from_indices(10, &[0, 3, 9]).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.contains(3));
        assert!(!s.contains(4));
        assert!(ItemSet::from_indices(4, &[4]).is_err());
    }

    #[test]
    fn mask_order_is_numeric() {
        let a = ItemSet::from_mask(4, 0b0011);
        let b = ItemSet::from_mask(4, 0b0100);
        assert_eq!(a.mask_cmp(&b), Ordering::Less);
        assert_eq!(b.mask_cmp(&b), Ordering::Equal);
    }

    #[test]
    fn wide_sets() {
        let mut s = ItemSet::empty(512);
        s.insert(511);
        s.insert(0);
        assert_eq!(s.len(), 2);
        let g = ItemSet::from_indices(512, &[511, 100]).unwrap();
        assert_eq!(s.intersection_len(&g), 1);
    }

    #[test]
    fn enum_cap_guard() {
        assert!(ItemSet::check_enum_cap(24, "test").is_ok());
        assert!(matches!(
            ItemSet::check_enum_cap(25, "test"),
            Err(Error::CapExceeded { .. })
        ));
    }
}
