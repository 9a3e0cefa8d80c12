//! Dense bit-set representations for vertex sets and exit-index sets.

use std::fmt;

/// A set of vertex ids over a graph with a fixed vertex count.
///
/// Backed by 64-bit words; all operations require both operands to share the
/// same capacity.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    words: Vec<u64>,
    capacity: usize,
}

impl VertexSet {
    pub fn new(capacity: usize) -> Self {
        VertexSet {
            words: vec![0; capacity.div_ceil(64)],
            capacity,
        }
    }

    pub fn full(capacity: usize) -> Self {
        let mut s = Self::new(capacity);
        for v in 0..capacity {
            s.insert(v);
        }
        s
    }

    pub fn from_iter<I: IntoIterator<Item = usize>>(capacity: usize, it: I) -> Self {
        let mut s = Self::new(capacity);
        for v in it {
            s.insert(v);
        }
        s
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn insert(&mut self, v: usize) -> bool {
        debug_assert!(v < self.capacity);
        let (w, b) = (v / 64, v % 64);
        let had = self.words[w] & (1 << b) != 0;
        self.words[w] |= 1 << b;
        !had
    }

    pub fn remove(&mut self, v: usize) {
        debug_assert!(v < self.capacity);
        self.words[v / 64] &= !(1 << (v % 64));
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.capacity && self.words[v / 64] & (1 << (v % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.capacity, other.capacity);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.capacity, other.capacity);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.capacity, other.capacity);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        debug_assert_eq!(self.capacity, other.capacity);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &VertexSet) -> bool {
        debug_assert_eq!(self.capacity, other.capacity);
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// Iterates the members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rem = w;
            std::iter::from_fn(move || {
                if rem == 0 {
                    None
                } else {
                    let b = rem.trailing_zeros() as usize;
                    rem &= rem - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A set of exit indices within one roMDP, 0-based, at most 64 exits.
///
/// Exit index `k` (0-based) is the `k+1`-th exit in the roMDP's exit order;
/// display is 1-based to match the usual indexing of open ends.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExitSet(pub u64);

/// Hard cap on exits per roMDP imposed by the `ExitSet` representation.
pub const MAX_EXITS: usize = 64;

impl ExitSet {
    pub const EMPTY: ExitSet = ExitSet(0);

    pub fn singleton(idx: usize) -> Self {
        debug_assert!(idx < MAX_EXITS);
        ExitSet(1 << idx)
    }

    pub fn all(n: usize) -> Self {
        debug_assert!(n <= MAX_EXITS);
        if n == 64 {
            ExitSet(u64::MAX)
        } else {
            ExitSet((1u64 << n) - 1)
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        let mut s = ExitSet::EMPTY;
        for i in it {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, idx: usize) {
        debug_assert!(idx < MAX_EXITS);
        self.0 |= 1 << idx;
    }

    pub fn remove(&mut self, idx: usize) {
        self.0 &= !(1 << idx);
    }

    pub fn contains(self, idx: usize) -> bool {
        idx < MAX_EXITS && self.0 & (1 << idx) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: ExitSet) -> ExitSet {
        ExitSet(self.0 | other.0)
    }

    pub fn intersect(self, other: ExitSet) -> ExitSet {
        ExitSet(self.0 & other.0)
    }

    pub fn is_subset_of(self, other: ExitSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Strict subset.
    pub fn is_proper_subset_of(self, other: ExitSet) -> bool {
        self != other && self.is_subset_of(other)
    }

    /// Shifts every index up by `n`; used when summing solutions. The
    /// caller guarantees the shifted indices stay below [`MAX_EXITS`],
    /// which also means an offset of exactly 64 only occurs on the empty
    /// set.
    pub fn shifted(self, n: usize) -> ExitSet {
        if self.0 == 0 {
            return self;
        }
        debug_assert!(n < MAX_EXITS && self.0.leading_zeros() as usize >= n);
        ExitSet(self.0 << n)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rem = self.0;
        std::iter::from_fn(move || {
            if rem == 0 {
                None
            } else {
                let b = rem.trailing_zeros() as usize;
                rem &= rem - 1;
                Some(b)
            }
        })
    }

    /// Iterates all subsets of `self`, including the empty set and `self`.
    pub fn subsets(self) -> impl Iterator<Item = ExitSet> {
        let mask = self.0;
        let mut cur = 0u64;
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let out = ExitSet(cur);
            if cur == mask {
                done = true;
            } else {
                cur = (cur.wrapping_sub(mask)) & mask;
            }
            Some(out)
        })
    }
}

impl fmt::Debug for ExitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ExitSet {
    /// 1-based, e.g. `{1,3}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_set_basics() {
        let mut s = VertexSet::new(130);
        assert!(s.is_empty());
        s.insert(0);
        s.insert(64);
        s.insert(129);
        assert_eq!(s.len(), 3);
        assert!(s.contains(64));
        assert!(!s.contains(63));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 64, 129]);
        s.remove(64);
        assert!(!s.contains(64));
    }

    #[test]
    fn vertex_set_algebra() {
        let a = VertexSet::from_iter(10, [1, 3, 5]);
        let b = VertexSet::from_iter(10, [3, 5, 7]);
        let mut u = a.clone();
        u.union_with(&b);
        assert_eq!(u.iter().collect::<Vec<_>>(), vec![1, 3, 5, 7]);
        let mut i = a.clone();
        i.intersect_with(&b);
        assert_eq!(i.iter().collect::<Vec<_>>(), vec![3, 5]);
        assert!(i.is_subset_of(&a));
        assert!(!a.is_subset_of(&b));
        assert!(a.intersects(&b));
    }

    #[test]
    fn exit_set_subsets_enumerates_power_set() {
        let m = ExitSet::from_indices([0, 2, 3]);
        let subs: Vec<_> = m.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.contains(&ExitSet::EMPTY));
        assert!(subs.contains(&m));
        for s in subs {
            assert!(s.is_subset_of(m));
        }
    }

    #[test]
    fn exit_set_display_is_one_based() {
        assert_eq!(ExitSet::from_indices([0, 2]).to_string(), "{1,3}");
        assert_eq!(ExitSet::EMPTY.to_string(), "{}");
    }

    #[test]
    fn exit_set_shift() {
        assert_eq!(
            ExitSet::from_indices([0, 1]).shifted(2),
            ExitSet::from_indices([2, 3])
        );
        // the empty set shifts by any offset, including 64
        assert_eq!(ExitSet::EMPTY.shifted(64), ExitSet::EMPTY);
    }
}
