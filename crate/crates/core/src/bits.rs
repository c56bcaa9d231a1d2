//! Fixed-length bit sets used for row selections.

use std::fmt;

/// A set of row indices in `0..len`, stored as packed 64-bit words.
///
/// All binary operations require both operands to share the same `len`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RowSet {
    words: Vec<u64>,
    len: usize,
}

impl RowSet {
    pub fn empty(len: usize) -> Self {
        RowSet {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut set = RowSet {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        set.clear_tail();
        set
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = RowSet::empty(len);
        for i in indices {
            set.insert(i);
        }
        set
    }

    pub fn from_bools(values: &[bool]) -> Self {
        let mut set = RowSet::empty(values.len());
        for (i, &v) in values.iter().enumerate() {
            if v {
                set.insert(i);
            }
        }
        set
    }

    /// Size of the universe `0..len`, not the number of members.
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "row {i} out of range 0..{}", self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersect(&self, other: &RowSet) -> RowSet {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn union(&self, other: &RowSet) -> RowSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &RowSet) -> RowSet {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> RowSet {
        let mut out = RowSet {
            words: self.words.iter().map(|w| !w).collect(),
            len: self.len,
        };
        out.clear_tail();
        out
    }

    pub fn intersect_with(&mut self, other: &RowSet) {
        self.check_len(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &RowSet) {
        self.check_len(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    /// `|self ∩ other|` without allocating.
    pub fn intersection_count(&self, other: &RowSet) -> usize {
        self.check_len(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `|self ∩ a ∩ b|` without allocating.
    pub fn intersection_count3(&self, a: &RowSet, b: &RowSet) -> usize {
        self.check_len(a);
        self.check_len(b);
        self.words
            .iter()
            .zip(&a.words)
            .zip(&b.words)
            .map(|((x, y), z)| (x & y & z).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + bit)
            })
        })
    }

    fn zip_with(&self, other: &RowSet, f: impl Fn(u64, u64) -> u64) -> RowSet {
        self.check_len(other);
        RowSet {
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect(),
            len: self.len,
        }
    }

    fn check_len(&self, other: &RowSet) {
        assert_eq!(self.len, other.len, "row sets over different universes");
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for RowSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_masks_tail() {
        let s = RowSet::full(70);
        assert_eq!(s.count(), 70);
        assert_eq!(s.complement().count(), 0);
    }

    #[test]
    fn set_algebra() {
        let a = RowSet::from_indices(130, [0, 3, 64, 129]);
        let b = RowSet::from_indices(130, [3, 64, 100]);
        assert_eq!(a.intersect(&b).iter().collect::<Vec<_>>(), vec![3, 64]);
        assert_eq!(a.difference(&b).iter().collect::<Vec<_>>(), vec![0, 129]);
        assert_eq!(a.union(&b).count(), 5);
        assert_eq!(a.intersection_count(&b), 2);
        assert_eq!(a.complement().count(), 126);
    }
}
