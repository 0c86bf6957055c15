//! Node-indexed sparse vectors.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::BuildHasherDefault;

use crate::graph::NodeId;

/// Fixed-key hasher so iteration order depends only on the insertion sequence.
pub(crate) type StableHasher = BuildHasherDefault<DefaultHasher>;
pub(crate) type StableMap<K, V> = HashMap<K, V, StableHasher>;

/// Sparse real vector over node ids. Zero entries are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVec {
    entries: StableMap<NodeId, f64>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(v: NodeId) -> Self {
        let mut out = Self::new();
        out.set(v, 1.0);
        out
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let mut out = Self::new();
        for (v, &x) in values.iter().enumerate() {
            out.set(v, x);
        }
        out
    }

    #[inline]
    pub fn get(&self, v: NodeId) -> f64 {
        self.entries.get(&v).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, v: NodeId, value: f64) {
        if value == 0.0 {
            self.entries.remove(&v);
        } else {
            self.entries.insert(v, value);
        }
    }

    /// Adds `delta` to entry `v` and returns the new value.
    #[inline]
    pub fn add(&mut self, v: NodeId, delta: f64) -> f64 {
        if delta == 0.0 {
            return self.get(v);
        }
        let slot = self.entries.entry(v).or_insert(0.0);
        *slot += delta;
        let value = *slot;
        if value == 0.0 {
            self.entries.remove(&v);
        }
        value
    }

    /// Removes entry `v`, returning its previous value (0 if absent).
    pub fn take(&mut self, v: NodeId) -> f64 {
        self.entries.remove(&v).unwrap_or(0.0)
    }

    /// Number of stored non-zeros.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.entries.iter().map(|(&v, &x)| (v, x))
    }

    /// Entries in ascending node order.
    pub fn sorted(&self) -> Vec<(NodeId, f64)> {
        let mut out: Vec<_> = self.iter().collect();
        out.sort_unstable_by_key(|&(v, _)| v);
        out
    }

    /// Sum of entries, accumulated in ascending node order.
    pub fn sum(&self) -> f64 {
        self.sorted().iter().map(|&(_, x)| x).sum()
    }

    pub fn max_value(&self) -> f64 {
        self.entries.values().copied().fold(0.0, f64::max)
    }

    /// Inner product with a dense vector, accumulated in ascending node order.
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.sorted()
            .iter()
            .map(|&(v, x)| x * dense.get(v).copied().unwrap_or(0.0))
            .sum()
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (v, x) in self.iter() {
            if v < n {
                out[v] = x;
            }
        }
        out
    }
}

impl FromIterator<(NodeId, f64)> for SparseVec {
    fn from_iter<I: IntoIterator<Item = (NodeId, f64)>>(iter: I) -> Self {
        let mut out = SparseVec::new();
        for (v, x) in iter {
            out.add(v, x);
        }
        out
    }
}
