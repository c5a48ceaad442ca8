use fixedbitset::FixedBitSet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A set of vertices of one graph, stored as a bitset over `0..capacity`.
/// Equality and hashing look at membership only, not capacity.
#[derive(Clone)]
pub struct VertexSet {
    bits: FixedBitSet,
}

impl PartialEq for VertexSet {
    fn eq(&self, other: &Self) -> bool {
        self.bits.ones().eq(other.bits.ones())
    }
}

impl Eq for VertexSet {}

impl std::fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl std::hash::Hash for VertexSet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for v in self.bits.ones() {
            v.hash(state);
        }
    }
}

impl VertexSet {
    pub fn new(capacity: usize) -> Self {
        VertexSet { bits: FixedBitSet::with_capacity(capacity) }
    }

    pub fn full(capacity: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(capacity);
        bits.insert_range(..);
        VertexSet { bits }
    }

    pub fn from_iter<I: IntoIterator<Item = usize>>(capacity: usize, items: I) -> Self {
        let mut s = Self::new(capacity);
        for v in items {
            s.insert(v);
        }
        s
    }

    pub(crate) fn from_bits(bits: FixedBitSet) -> Self {
        VertexSet { bits }
    }

    pub(crate) fn bits(&self) -> &FixedBitSet {
        &self.bits
    }

    pub fn capacity(&self) -> usize {
        self.bits.len()
    }

    /// Panics if `v >= capacity`.
    pub fn insert(&mut self, v: usize) -> bool {
        let had = self.bits.contains(v);
        self.bits.insert(v);
        !had
    }

    pub fn remove(&mut self, v: usize) -> bool {
        let had = self.bits.contains(v);
        if had {
            self.bits.set(v, false);
        }
        had
    }

    pub fn contains(&self, v: usize) -> bool {
        self.bits.contains(v)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.bits.ones().collect()
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        self.bits.union_with(&other.bits);
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        self.bits.intersect_with(&other.bits);
    }

    pub fn difference_with(&mut self, other: &VertexSet) {
        self.bits.difference_with(&other.bits);
    }

    pub fn intersection_count(&self, other: &VertexSet) -> usize {
        self.bits.intersection_count(&other.bits)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn clear(&mut self) {
        self.bits.clear();
    }
}

// Serialized as a sorted index array; the capacity is implied by the owning graph.
impl Serialize for VertexSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.bits.ones())
    }
}

impl<'de> Deserialize<'de> for VertexSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let items: Vec<usize> = Vec::deserialize(d)?;
        let cap = items.iter().max().map_or(0, |m| m + 1);
        Ok(VertexSet::from_iter(cap, items))
    }
}

impl VertexSet {
    /// Re-home a set onto a (larger) capacity, e.g. after deserialization.
    pub fn with_capacity(&self, capacity: usize) -> VertexSet {
        let mut bits = self.bits.clone();
        if bits.len() < capacity {
            bits.grow(capacity);
        }
        VertexSet { bits }
    }
}
