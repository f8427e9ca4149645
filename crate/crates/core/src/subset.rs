//! Feature subsets as fixed-width bitmasks. A subset doubles as the joint
//! action of the per-feature agents: bit j set means feature j is included.

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureSubset {
    num_features: usize,
    words: Vec<u64>,
}

impl FeatureSubset {
    pub fn empty(num_features: usize) -> Self {
        let words = vec![0u64; num_features.div_ceil(WORD_BITS)];
        FeatureSubset {
            num_features,
            words,
        }
    }

    pub fn full(num_features: usize) -> Self {
        let mut s = Self::empty(num_features);
        for j in 0..num_features {
            s.insert(j);
        }
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(num_features: usize, indices: I) -> Self {
        let mut s = Self::empty(num_features);
        for j in indices {
            assert!(j < num_features, "feature index {j} out of range");
            s.insert(j);
        }
        s
    }

    /// Build from a joint-action bitstring (one 0/1 action per agent).
    pub fn from_actions(actions: &[u8]) -> Self {
        let mut s = Self::empty(actions.len());
        for (j, &a) in actions.iter().enumerate() {
            if a != 0 {
                s.insert(j);
            }
        }
        s
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn contains(&self, j: usize) -> bool {
        debug_assert!(j < self.num_features);
        self.words[j / WORD_BITS] >> (j % WORD_BITS) & 1 == 1
    }

    pub fn insert(&mut self, j: usize) {
        debug_assert!(j < self.num_features);
        self.words[j / WORD_BITS] |= 1 << (j % WORD_BITS);
    }

    pub fn remove(&mut self, j: usize) {
        debug_assert!(j < self.num_features);
        self.words[j / WORD_BITS] &= !(1 << (j % WORD_BITS));
    }

    /// Set bit j; errors when the bit already has the requested state.
    pub fn set_checked(&mut self, j: usize, on: bool) -> Result<()> {
        if self.contains(j) == on {
            return Err(Error::RedundantToggle { feature: j, on });
        }
        if on {
            self.insert(j)
        } else {
            self.remove(j)
        }
        Ok(())
    }

    pub fn flip(&mut self, j: usize) {
        debug_assert!(j < self.num_features);
        self.words[j / WORD_BITS] ^= 1 << (j % WORD_BITS);
    }

    /// Number of included features, |S|.
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_features).filter(|&j| self.contains(j))
    }

    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Indices where self and other differ (symmetric difference).
    pub fn diff_indices(&self, other: &FeatureSubset) -> Vec<usize> {
        assert_eq!(self.num_features, other.num_features);
        let mut out = Vec::new();
        for (w, (&a, &b)) in self.words.iter().zip(other.words.iter()).enumerate() {
            let mut x = a ^ b;
            while x != 0 {
                let bit = x.trailing_zeros() as usize;
                out.push(w * WORD_BITS + bit);
                x &= x - 1;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_roundtrip() {
        let mut s = FeatureSubset::empty(130);
        assert!(s.is_empty());
        s.insert(0);
        s.insert(64);
        s.insert(129);
        assert_eq!(s.len(), 3);
        assert_eq!(s.indices(), vec![0, 64, 129]);
        s.remove(64);
        assert!(!s.contains(64));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn from_actions_extracts_on_bits() {
        let s = FeatureSubset::from_actions(&[1, 0, 0, 1, 1]);
        assert_eq!(s.indices(), vec![0, 3, 4]);
    }

    #[test]
    fn set_checked_rejects_redundant_toggle() {
        let mut s = FeatureSubset::empty(4);
        s.insert(2);
        assert!(s.set_checked(2, true).is_err());
        assert!(s.set_checked(2, false).is_ok());
        assert!(s.set_checked(2, false).is_err());
    }

    #[test]
    fn diff_indices_is_symmetric_difference() {
        let a = FeatureSubset::from_indices(100, [1, 5, 70]);
        let b = FeatureSubset::from_indices(100, [5, 70, 99]);
        assert_eq!(a.diff_indices(&b), vec![1, 99]);
        assert_eq!(b.diff_indices(&a), vec![1, 99]);
    }

    #[test]
    fn full_contains_everything() {
        let s = FeatureSubset::full(67);
        assert_eq!(s.len(), 67);
        assert!(s.contains(66));
    }
}
