//! Brute-force ground truth: permutation tests and fiber histograms on full
//! value tables, plus the bulk agreement sweeps and exhaustive converse
//! search built on them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::field::Indexed;

pub mod converse;
pub mod reproduce;
pub mod sweep;

/// Whether the table is a bijection of `0..table.len()`.
pub fn is_permutation<T: Indexed>(table: &[T]) -> bool {
    let mut seen = vec![false; table.len()];
    for &v in table {
        match seen.get_mut(v.index() as usize) {
            Some(slot) if !*slot => *slot = true,
            _ => return false,
        }
    }
    true
}

/// Map from fiber size to the number of codomain points with that many
/// preimages. The codomain is taken to be the domain `0..table.len()`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FiberHistogram {
    pub counts: BTreeMap<usize, usize>,
}

impl FiberHistogram {
    pub fn of<T: Indexed>(table: &[T]) -> Self {
        let mut fibers = vec![0usize; table.len()];
        for &v in table {
            fibers[v.index() as usize] += 1;
        }
        let mut counts = BTreeMap::new();
        for s in fibers {
            *counts.entry(s).or_insert(0) += 1;
        }
        FiberHistogram { counts }
    }

    /// Number of codomain points.
    pub fn points(&self) -> usize {
        self.counts.values().sum()
    }

    /// Number of preimages accounted for.
    pub fn mass(&self) -> usize {
        self.counts.iter().map(|(s, c)| s * c).sum()
    }

    pub fn is_permutation(&self) -> bool {
        self.counts.len() == 1 && self.counts.contains_key(&1)
    }

    /// Whether the map is exactly `s`-to-1: every point has fiber `0` or `s`.
    pub fn is_uniform(&self, s: usize) -> bool {
        self.counts.keys().all(|&k| k == 0 || k == s)
    }
}

pub fn fiber_histogram<T: Indexed>(table: &[T]) -> FiberHistogram {
    FiberHistogram::of(table)
}
