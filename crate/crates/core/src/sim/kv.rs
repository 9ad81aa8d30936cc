use alloc::vec::Vec;

use super::{check_upsert, EdgeRecord, Layout, SimStore};
use crate::error::{Error, Result};
use crate::kv::{Key, MemKv, OrderedKv};
use crate::profile::{ProfileId, SimilarityEdge};

/// Row key `a-b`.
fn pair_key(a: &ProfileId, b: &ProfileId) -> Key {
    let mut key = Key::new();
    key.extend_from_slice(a.as_str().as_bytes());
    key.push(b'-');
    key.extend_from_slice(b.as_str().as_bytes());
    key
}

fn prefix_key(id: &ProfileId) -> Key {
    let mut key = Key::new();
    key.extend_from_slice(id.as_str().as_bytes());
    key.push(b'-');
    key
}

/// Splits a row key back into its two ids. Ids never contain `-`.
fn split_key(key: &[u8]) -> (ProfileId, ProfileId) {
    let text = core::str::from_utf8(key).expect("row keys are built from utf-8 ids");
    let (a, b) = text.split_once('-').expect("row keys contain a separator");
    (
        ProfileId::new(a).expect("stored ids are valid"),
        ProfileId::new(b).expect("stored ids are valid"),
    )
}

fn canonical(a: &ProfileId, b: &ProfileId) -> Result<Key> {
    match a.cmp(b) {
        core::cmp::Ordering::Less => Ok(pair_key(a, b)),
        core::cmp::Ordering::Greater => Ok(pair_key(b, a)),
        core::cmp::Ordering::Equal => Err(Error::SameId(a.clone())),
    }
}

fn sorted(mut edges: Vec<SimilarityEdge>) -> Vec<SimilarityEdge> {
    edges.sort_by(|x, y| (&x.id1, &x.id2).cmp(&(&y.id1, &y.id2)));
    edges
}

/// One record per pair, keyed `id1-id2`.
///
/// Lookups from the first id are prefix scans. Lookups from the second id
/// have no key support and fall back to a full scan.
#[derive(Debug, Clone)]
pub struct KvSingle<K = MemKv<EdgeRecord>> {
    kv: K,
    tau_store: f64,
}

impl KvSingle {
    pub fn new(tau_store: f64) -> Self {
        Self { kv: MemKv::new(), tau_store }
    }
}

impl<K: OrderedKv<EdgeRecord>> SimStore for KvSingle<K> {
    fn layout(&self) -> Layout {
        Layout::KvSingle
    }

    fn tau_store(&self) -> f64 {
        self.tau_store
    }

    fn upsert_edge(&mut self, e: &SimilarityEdge) -> Result<()> {
        check_upsert(e, self.tau_store)?;
        self.kv.insert(pair_key(&e.id1, &e.id2), EdgeRecord::of(e));
        Ok(())
    }

    fn get_edge(&self, a: &ProfileId, b: &ProfileId) -> Result<SimilarityEdge> {
        let (id1, id2) = super::ordered(a, b)?;
        match self.kv.get(&pair_key(&id1, &id2)) {
            Some(rec) => Ok(rec.edge(id1, id2)),
            None => Err(Error::EdgeNotFound(id1, id2)),
        }
    }

    fn contains_pair(&self, a: &ProfileId, b: &ProfileId) -> bool {
        canonical(a, b).is_ok_and(|k| self.kv.get(&k).is_some())
    }

    fn neighbors(&self, id: &ProfileId) -> Vec<SimilarityEdge> {
        let prefix = prefix_key(id);
        let mut suffix = Vec::with_capacity(id.as_str().len() + 1);
        suffix.push(b'-');
        suffix.extend_from_slice(id.as_str().as_bytes());

        let first = self.kv.scan_prefix(&prefix);
        let second = self.kv.scan_all().filter(|(k, _)| k.ends_with(&suffix) && !k.starts_with(&prefix));
        sorted(
            first
                .chain(second)
                .map(|(k, rec)| {
                    let (a, b) = split_key(k);
                    rec.edge(a, b)
                })
                .collect(),
        )
    }

    fn delete_edge(&mut self, a: &ProfileId, b: &ProfileId) -> bool {
        canonical(a, b).is_ok_and(|k| self.kv.remove(&k).is_some())
    }

    fn edges(&self) -> Vec<SimilarityEdge> {
        sorted(
            self.kv
                .scan_all()
                .map(|(k, rec)| {
                    let (a, b) = split_key(k);
                    rec.edge(a, b)
                })
                .collect(),
        )
    }

    fn edge_count(&self) -> usize {
        self.kv.len()
    }

    fn record_count(&self) -> usize {
        self.kv.len()
    }
}

/// Two records per pair, at `id1-id2` and `id2-id1`, so a prefix scan from
/// either id finds every edge.
#[derive(Debug, Clone)]
pub struct KvDual<K = MemKv<EdgeRecord>> {
    kv: K,
    tau_store: f64,
}

impl KvDual {
    pub fn new(tau_store: f64) -> Self {
        Self { kv: MemKv::new(), tau_store }
    }
}

impl<K: OrderedKv<EdgeRecord>> SimStore for KvDual<K> {
    fn layout(&self) -> Layout {
        Layout::KvDual
    }

    fn tau_store(&self) -> f64 {
        self.tau_store
    }

    fn upsert_edge(&mut self, e: &SimilarityEdge) -> Result<()> {
        check_upsert(e, self.tau_store)?;
        let rec = EdgeRecord::of(e);
        self.kv.insert(pair_key(&e.id1, &e.id2), rec);
        self.kv.insert(pair_key(&e.id2, &e.id1), rec);
        Ok(())
    }

    fn get_edge(&self, a: &ProfileId, b: &ProfileId) -> Result<SimilarityEdge> {
        let (id1, id2) = super::ordered(a, b)?;
        match self.kv.get(&pair_key(&id1, &id2)) {
            Some(rec) => Ok(rec.edge(id1, id2)),
            None => Err(Error::EdgeNotFound(id1, id2)),
        }
    }

    fn contains_pair(&self, a: &ProfileId, b: &ProfileId) -> bool {
        canonical(a, b).is_ok_and(|k| self.kv.get(&k).is_some())
    }

    fn neighbors(&self, id: &ProfileId) -> Vec<SimilarityEdge> {
        sorted(
            self.kv
                .scan_prefix(&prefix_key(id))
                .map(|(k, rec)| {
                    let (a, b) = split_key(k);
                    if a < b {
                        rec.edge(a, b)
                    } else {
                        rec.edge(b, a)
                    }
                })
                .collect(),
        )
    }

    fn delete_edge(&mut self, a: &ProfileId, b: &ProfileId) -> bool {
        if a == b {
            return false;
        }
        let forward = self.kv.remove(&pair_key(a, b)).is_some();
        let backward = self.kv.remove(&pair_key(b, a)).is_some();
        forward || backward
    }

    fn edges(&self) -> Vec<SimilarityEdge> {
        sorted(
            self.kv
                .scan_all()
                .filter_map(|(k, rec)| {
                    let (a, b) = split_key(k);
                    (a < b).then(|| rec.edge(a, b))
                })
                .collect(),
        )
    }

    fn edge_count(&self) -> usize {
        self.kv.len() / 2
    }

    fn record_count(&self) -> usize {
        self.kv.len()
    }
}
