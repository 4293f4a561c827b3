//! Compact sets of element ids backed by `u64` blocks.
//!
//! Element ids are 1-based throughout the crate; a set created with
//! `ElemSet::empty(n)` holds ids from `1..=n`. All sets taking part in one
//! game share the same universe size, which keeps the block-wise operations
//! branch-free.

/// Set of element ids out of a fixed universe `{1, …, n}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElemSet {
    universe: u32,
    words: Vec<u64>,
}

#[inline]
fn word_index(id: u32) -> (usize, u64) {
    ((id as usize) / 64, 1u64 << (id % 64))
}

impl ElemSet {
    pub fn empty(universe: u32) -> Self {
        // Bit 0 is unused so ids index the bitmap directly.
        let words = vec![0u64; (universe as usize + 64) / 64];
        ElemSet { universe, words }
    }

    pub fn full(universe: u32) -> Self {
        let mut s = Self::empty(universe);
        for id in 1..=universe {
            s.insert(id);
        }
        s
    }

    pub fn from_ids<I: IntoIterator<Item = u32>>(universe: u32, ids: I) -> Self {
        let mut s = Self::empty(universe);
        for id in ids {
            s.insert(id);
        }
        s
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn insert(&mut self, id: u32) {
        debug_assert!(id >= 1 && id <= self.universe, "id {id} out of universe");
        let (w, b) = word_index(id);
        self.words[w] |= b;
    }

    pub fn remove(&mut self, id: u32) {
        let (w, b) = word_index(id);
        self.words[w] &= !b;
    }

    pub fn contains(&self, id: u32) -> bool {
        if id == 0 || id > self.universe {
            return false;
        }
        let (w, b) = word_index(id);
        self.words[w] & b != 0
    }

    pub fn len(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &ElemSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &ElemSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn subtract(&mut self, other: &ElemSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn union(&self, other: &ElemSet) -> ElemSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &ElemSet) -> ElemSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn difference(&self, other: &ElemSet) -> ElemSet {
        let mut s = self.clone();
        s.subtract(other);
        s
    }

    pub fn intersects(&self, other: &ElemSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset_of(&self, other: &ElemSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Smallest id in the set, if any.
    pub fn min_id(&self) -> Option<u32> {
        for (i, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some((i * 64) as u32 + w.trailing_zeros());
            }
        }
        None
    }

    /// Largest id in the set, if any.
    pub fn max_id(&self) -> Option<u32> {
        for (i, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some((i * 64) as u32 + 63 - w.leading_zeros());
            }
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let base = (i * 64) as u32;
            std::iter::successors(
                if w == 0 { None } else { Some(w) },
                |&rest| {
                    let next = rest & (rest - 1);
                    if next == 0 {
                        None
                    } else {
                        Some(next)
                    }
                },
            )
            .map(move |rest| base + rest.trailing_zeros())
        })
    }

    pub fn ids(&self) -> Vec<u32> {
        self.iter().collect()
    }
}

impl std::fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let mut a = ElemSet::empty(100);
        a.insert(1);
        a.insert(64);
        a.insert(65);
        a.insert(100);
        assert_eq!(a.len(), 4);
        assert_eq!(a.ids(), vec![1, 64, 65, 100]);
        assert!(a.contains(64));
        assert!(!a.contains(2));
        assert_eq!(a.min_id(), Some(1));
        assert_eq!(a.max_id(), Some(100));

        let b = ElemSet::from_ids(100, [64, 2]);
        assert!(a.intersects(&b));
        assert_eq!(a.intersection(&b).ids(), vec![64]);
        assert_eq!(a.difference(&b).ids(), vec![1, 65, 100]);
        assert_eq!(a.union(&b).len(), 5);
        assert!(!ElemSet::from_ids(100, [64]).is_subset_of(&b.difference(&a)));
        assert!(ElemSet::from_ids(100, [64, 2]).is_subset_of(&b));
    }

    #[test]
    fn full_and_empty() {
        let f = ElemSet::full(130);
        assert_eq!(f.len(), 130);
        assert!(!f.contains(0));
        assert!(f.contains(130));
        assert!(ElemSet::empty(9).is_empty());
        assert_eq!(ElemSet::empty(9).min_id(), None);
    }
}
