//! Similarity-edge storage under three physical layouts.
//!
//! * [`IndexedTable`]: relational-style row heap with a primary index on the
//!   pair and one secondary index per id column.
//! * [`KvSingle`]: one key-value record per pair at `id1-id2`.
//! * [`KvDual`]: two records per pair, at `id1-id2` and `id2-id1`.
//!
//! All layouts behave the same through [`SimStore`]; they differ in how many
//! records a write touches and how `neighbors` finds edges.

mod indexed;
mod kv;

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::profile::{canonical_pair, Decision, ProfileId, SimilarityEdge};

pub use indexed::IndexedTable;
pub use kv::{KvDual, KvSingle};

/// Default pruning threshold: edges scoring below it are not stored.
pub const DEFAULT_TAU_STORE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layout {
    IndexedTable,
    KvSingle,
    KvDual,
}

impl Layout {
    pub const ALL: [Layout; 3] = [Layout::IndexedTable, Layout::KvSingle, Layout::KvDual];

    pub fn as_str(self) -> &'static str {
        match self {
            Layout::IndexedTable => "indexed_table",
            Layout::KvSingle => "kv_single",
            Layout::KvDual => "kv_dual",
        }
    }

    /// Empty store of this layout.
    pub fn create(self, tau_store: f64) -> Box<dyn SimStore + Send + Sync> {
        match self {
            Layout::IndexedTable => Box::new(IndexedTable::new(tau_store)),
            Layout::KvSingle => Box::new(KvSingle::new(tau_store)),
            Layout::KvDual => Box::new(KvDual::new(tau_store)),
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Layout::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::UnknownLayout(s.into()))
    }
}

/// Edge payload without the ids (they live in the key or row).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRecord {
    pub simsc: f64,
    pub rejsc: u32,
    pub cfm: bool,
    pub decision: Decision,
}

impl EdgeRecord {
    fn of(e: &SimilarityEdge) -> Self {
        Self { simsc: e.simsc, rejsc: e.rejsc, cfm: e.cfm, decision: e.decision }
    }

    fn edge(self, id1: ProfileId, id2: ProfileId) -> SimilarityEdge {
        SimilarityEdge {
            id1,
            id2,
            simsc: self.simsc,
            rejsc: self.rejsc,
            cfm: self.cfm,
            decision: self.decision,
        }
    }
}

/// Logical similarity-edge store.
pub trait SimStore {
    fn layout(&self) -> Layout;

    fn tau_store(&self) -> f64;

    /// Inserts or overwrites the edge for `(e.id1, e.id2)`.
    fn upsert_edge(&mut self, e: &SimilarityEdge) -> Result<()>;

    /// The stored edge for `{a, b}`, whatever the argument order.
    fn get_edge(&self, a: &ProfileId, b: &ProfileId) -> Result<SimilarityEdge>;

    fn contains_pair(&self, a: &ProfileId, b: &ProfileId) -> bool;

    /// Every stored edge with `id` at either end, ordered by `(id1, id2)`.
    fn neighbors(&self, id: &ProfileId) -> Vec<SimilarityEdge>;

    /// Removes the edge for `{a, b}`; returns whether it existed.
    fn delete_edge(&mut self, a: &ProfileId, b: &ProfileId) -> bool;

    /// All logical edges ordered by `(id1, id2)`.
    fn edges(&self) -> Vec<SimilarityEdge>;

    fn edge_count(&self) -> usize;

    /// Physical records held, which is twice the edge count for [`KvDual`].
    fn record_count(&self) -> usize;

    /// For each edge: search the pair, delete the old entry if present,
    /// insert the new one. Stops at the first invalid edge; edges before it
    /// stay applied. Returns the number applied.
    fn update_transaction(&mut self, batch: &[SimilarityEdge]) -> Result<usize> {
        for e in batch {
            check_upsert(e, self.tau_store())?;
            if self.contains_pair(&e.id1, &e.id2) {
                self.delete_edge(&e.id1, &e.id2);
            }
            self.upsert_edge(e)?;
        }
        Ok(batch.len())
    }
}

pub(crate) fn check_upsert(e: &SimilarityEdge, tau_store: f64) -> Result<()> {
    e.validate()?;
    if e.simsc.is_nan() || e.simsc < tau_store {
        return Err(Error::BelowThreshold { simsc: e.simsc, tau: tau_store });
    }
    Ok(())
}

pub(crate) fn ordered(a: &ProfileId, b: &ProfileId) -> Result<(ProfileId, ProfileId)> {
    canonical_pair(a.clone(), b.clone())
}

#[cfg(test)]
mod tests;
