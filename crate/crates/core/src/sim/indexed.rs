use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::{check_upsert, EdgeRecord, Layout, SimStore};
use crate::error::{Error, Result};
use crate::kv::Key;
use crate::profile::{ProfileId, SimilarityEdge};

type RowId = u64;

#[derive(Debug, Clone)]
struct Row {
    id1: ProfileId,
    id2: ProfileId,
    rec: EdgeRecord,
}

/// Composite index key `a 0x00 b`.
fn pair_key(a: &ProfileId, b: &ProfileId) -> Key {
    let mut key = Key::new();
    key.extend_from_slice(a.as_str().as_bytes());
    key.push(0);
    key.extend_from_slice(b.as_str().as_bytes());
    key
}

/// Secondary index entry `id 0x00 row-id(big-endian)`.
fn column_key(id: &ProfileId, row: RowId) -> Key {
    let mut key = Key::new();
    key.extend_from_slice(id.as_str().as_bytes());
    key.push(0);
    key.extend_from_slice(&row.to_be_bytes());
    key
}

fn column_prefix(id: &ProfileId) -> Key {
    let mut key = Key::new();
    key.extend_from_slice(id.as_str().as_bytes());
    key.push(0);
    key
}

/// Relational-style table: a row heap, a unique index on `(id1, id2)` and a
/// secondary index on each id column, all maintained on every write.
#[derive(Debug, Clone, Default)]
pub struct IndexedTable {
    heap: BTreeMap<RowId, Row>,
    next_row: RowId,
    primary: BTreeMap<Key, RowId>,
    by_id1: BTreeSet<Key>,
    by_id2: BTreeSet<Key>,
    tau_store: f64,
}

impl IndexedTable {
    pub fn new(tau_store: f64) -> Self {
        Self { tau_store, ..Self::default() }
    }

    fn lookup(&self, a: &ProfileId, b: &ProfileId) -> Option<RowId> {
        let (id1, id2) = if a < b { (a, b) } else { (b, a) };
        self.primary.get(&pair_key(id1, id2)).copied()
    }

    fn rows_in(&self, index: &BTreeSet<Key>, id: &ProfileId) -> Vec<RowId> {
        let prefix = column_prefix(id);
        index
            .range(prefix.clone()..)
            .take_while(|k| k.starts_with(&prefix))
            .map(|k| {
                let tail: [u8; 8] = k[k.len() - 8..].try_into().expect("8-byte row id suffix");
                RowId::from_be_bytes(tail)
            })
            .collect()
    }
}

impl SimStore for IndexedTable {
    fn layout(&self) -> Layout {
        Layout::IndexedTable
    }

    fn tau_store(&self) -> f64 {
        self.tau_store
    }

    fn upsert_edge(&mut self, e: &SimilarityEdge) -> Result<()> {
        check_upsert(e, self.tau_store)?;
        let key = pair_key(&e.id1, &e.id2);
        if let Some(row) = self.primary.get(&key) {
            let row = self.heap.get_mut(row).expect("primary index points at a live row");
            row.rec = EdgeRecord::of(e);
            return Ok(());
        }
        let row = self.next_row;
        self.next_row += 1;
        self.heap.insert(row, Row { id1: e.id1.clone(), id2: e.id2.clone(), rec: EdgeRecord::of(e) });
        self.primary.insert(key, row);
        self.by_id1.insert(column_key(&e.id1, row));
        self.by_id2.insert(column_key(&e.id2, row));
        Ok(())
    }

    fn get_edge(&self, a: &ProfileId, b: &ProfileId) -> Result<SimilarityEdge> {
        let (id1, id2) = super::ordered(a, b)?;
        match self.lookup(&id1, &id2) {
            Some(row) => Ok(self.heap[&row].rec.edge(id1, id2)),
            None => Err(Error::EdgeNotFound(id1, id2)),
        }
    }

    fn contains_pair(&self, a: &ProfileId, b: &ProfileId) -> bool {
        a != b && self.lookup(a, b).is_some()
    }

    fn neighbors(&self, id: &ProfileId) -> Vec<SimilarityEdge> {
        let mut rows = self.rows_in(&self.by_id1, id);
        rows.extend(self.rows_in(&self.by_id2, id));
        let mut edges: Vec<SimilarityEdge> = rows
            .into_iter()
            .map(|r| {
                let row = &self.heap[&r];
                row.rec.edge(row.id1.clone(), row.id2.clone())
            })
            .collect();
        edges.sort_by(|x, y| (&x.id1, &x.id2).cmp(&(&y.id1, &y.id2)));
        edges
    }

    fn delete_edge(&mut self, a: &ProfileId, b: &ProfileId) -> bool {
        if a == b {
            return false;
        }
        let (id1, id2) = if a < b { (a, b) } else { (b, a) };
        let Some(row) = self.primary.remove(&pair_key(id1, id2)) else {
            return false;
        };
        self.heap.remove(&row);
        self.by_id1.remove(&column_key(id1, row));
        self.by_id2.remove(&column_key(id2, row));
        true
    }

    fn edges(&self) -> Vec<SimilarityEdge> {
        self.primary
            .values()
            .map(|r| {
                let row = &self.heap[r];
                row.rec.edge(row.id1.clone(), row.id2.clone())
            })
            .collect()
    }

    fn edge_count(&self) -> usize {
        self.primary.len()
    }

    fn record_count(&self) -> usize {
        self.heap.len()
    }
}
