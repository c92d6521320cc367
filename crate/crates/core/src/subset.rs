//! Subsets of modalities as bitmasks.
//!
//! Modalities are indexed 0..M internally. User-facing text (Display,
//! serialized reports, config files) numbers them 1..M, matching the
//! X_1,…,X_M convention used throughout the documentation.

use crate::error::{Error, Result};

/// Maximum number of modalities representable by the bitmask.
pub const MAX_MODALITIES: usize = 32;

/// A subset A ⊆ {0,…,M−1} of modality indices, stored as a bitmask.
///
/// Ordering is by mask value, which gives mixtures a canonical subset order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetIndex(u32);

impl SubsetIndex {
    pub const EMPTY: SubsetIndex = SubsetIndex(0);

    pub fn from_bits(bits: u32) -> Self {
        SubsetIndex(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn singleton(index: usize) -> Self {
        assert!(index < MAX_MODALITIES, "modality index out of range");
        SubsetIndex(1 << index)
    }

    /// The full set {0,…,m−1}.
    pub fn full(m: usize) -> Self {
        assert!(m <= MAX_MODALITIES, "too many modalities");
        if m == MAX_MODALITIES {
            SubsetIndex(u32::MAX)
        } else {
            SubsetIndex((1u32 << m) - 1)
        }
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        let mut bits = 0u32;
        for &i in indices {
            assert!(i < MAX_MODALITIES, "modality index out of range");
            bits |= 1 << i;
        }
        SubsetIndex(bits)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, index: usize) -> bool {
        index < MAX_MODALITIES && self.0 & (1 << index) != 0
    }

    pub fn union(self, other: SubsetIndex) -> SubsetIndex {
        SubsetIndex(self.0 | other.0)
    }

    pub fn intersection(self, other: SubsetIndex) -> SubsetIndex {
        SubsetIndex(self.0 & other.0)
    }

    pub fn is_disjoint(self, other: SubsetIndex) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset_of(self, other: SubsetIndex) -> bool {
        self.0 & !other.0 == 0
    }

    /// Complement with respect to the full set on `m` modalities.
    pub fn complement(self, m: usize) -> SubsetIndex {
        SubsetIndex(Self::full(m).0 & !self.0)
    }

    pub fn with(self, index: usize) -> SubsetIndex {
        self.union(SubsetIndex::singleton(index))
    }

    /// Iterates member indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..MAX_MODALITIES).filter(move |i| bits & (1 << i) != 0)
    }

    pub fn indices(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Checks that every member index is < `modalities`.
    pub fn validate(self, modalities: usize) -> Result<()> {
        if self.is_subset_of(SubsetIndex::full(modalities.min(MAX_MODALITIES)))
            && modalities <= MAX_MODALITIES
        {
            Ok(())
        } else {
            Err(Error::InvalidSubset {
                subset: self,
                modalities,
            })
        }
    }
}

impl std::fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
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

impl serde::Serialize for SubsetIndex {
    /// Serializes as the sorted list of 1-based modality numbers.
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for i in self.iter() {
            seq.serialize_element(&(i + 1))?;
        }
        seq.end()
    }
}
