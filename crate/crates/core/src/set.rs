//! Dense bitset over candidate (or universe element) indices.

use std::fmt;

/// A subset of `0..len`, stored as packed 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CandidateSet {
    len: usize,
    words: Vec<u64>,
}

impl CandidateSet {
    pub fn empty(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::empty(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    /// Builds the set whose members are the set bits of `mask` (requires `len <= 64`).
    pub fn from_mask(len: usize, mask: u64) -> Self {
        assert!(len <= 64, "from_mask supports at most 64 elements");
        let mut s = Self::empty(len);
        if len > 0 {
            let keep = if len == 64 {
                u64::MAX
            } else {
                (1u64 << len) - 1
            };
            s.words[0] = mask & keep;
        }
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, it: I) -> Self {
        let mut s = Self::empty(len);
        for i in it {
            s.insert(i);
        }
        s
    }

    /// Universe size (not the number of members).
    #[inline]
    pub fn universe(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.len, "index {i} outside universe of {}", self.len);
        let had = self.contains(i);
        self.words[i / 64] |= 1 << (i % 64);
        !had
    }

    #[inline]
    pub fn remove(&mut self, i: usize) -> bool {
        let had = self.contains(i);
        if had {
            self.words[i / 64] &= !(1 << (i % 64));
        }
        had
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
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

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersection_count(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn union_with(&mut self, other: &Self) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.intersection_count(other) == 0
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    /// Low 64 members as a mask; only meaningful when `universe() <= 64`.
    pub fn low_mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }
}

impl fmt::Debug for CandidateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_ops() {
        let mut s = CandidateSet::empty(70);
        assert!(s.insert(3));
        assert!(!s.insert(3));
        s.insert(65);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![3, 65]);
        assert_eq!(s.count(), 2);
        assert!(s.remove(3));
        assert!(!s.contains(3));
        assert!(CandidateSet::empty(0).is_empty());
    }

    #[test]
    fn mask_round_trip() {
        let s = CandidateSet::from_mask(5, 0b10110);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 2, 4]);
        assert_eq!(s.low_mask(), 0b10110);
        assert_eq!(CandidateSet::from_mask(3, 0xff).count(), 3);
    }

    proptest! {
        #[test]
        fn subset_and_counts(a in prop::collection::vec(0usize..100, 0..20), b in prop::collection::vec(0usize..100, 0..20)) {
            let sa = CandidateSet::from_indices(100, a.iter().copied());
            let mut su = sa.clone();
            su.union_with(&CandidateSet::from_indices(100, b.iter().copied()));
            prop_assert!(sa.is_subset(&su));
            prop_assert_eq!(sa.intersection_count(&su), sa.count());
        }
    }
}
