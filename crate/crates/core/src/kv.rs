//! Ordered key-value substrate shared by the profile rows and the
//! key-value similarity layouts.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;

use smallvec::SmallVec;

/// Row key. Keys up to 24 bytes live inline in the tree nodes, so lookups in
/// large maps compare bytes without chasing a pointer per node.
pub type Key = SmallVec<[u8; 24]>;

pub type KvIter<'a, V> = Box<dyn Iterator<Item = (&'a [u8], &'a V)> + 'a>;

/// Sorted map from byte keys to values with prefix scans.
pub trait OrderedKv<V> {
    fn get(&self, key: &[u8]) -> Option<&V>;
    fn insert(&mut self, key: Key, value: V) -> Option<V>;
    fn remove(&mut self, key: &[u8]) -> Option<V>;
    /// Entries whose key starts with `prefix`, in key order.
    fn scan_prefix<'a>(&'a self, prefix: &[u8]) -> KvIter<'a, V>;
    /// All entries in key order.
    fn scan_all(&self) -> KvIter<'_, V>;
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// In-memory B-tree implementation.
#[derive(Debug, Clone)]
pub struct MemKv<V> {
    map: BTreeMap<Key, V>,
}

impl<V> Default for MemKv<V> {
    fn default() -> Self {
        Self { map: BTreeMap::new() }
    }
}

impl<V> MemKv<V> {
    pub fn new() -> Self {
        Self::default()
    }
}

impl<V> OrderedKv<V> for MemKv<V> {
    fn get(&self, key: &[u8]) -> Option<&V> {
        self.map.get(key)
    }

    fn insert(&mut self, key: Key, value: V) -> Option<V> {
        self.map.insert(key, value)
    }

    fn remove(&mut self, key: &[u8]) -> Option<V> {
        self.map.remove(key)
    }

    fn scan_prefix<'a>(&'a self, prefix: &[u8]) -> KvIter<'a, V> {
        let prefix = Key::from_slice(prefix);
        Box::new(
            self.map
                .range::<[u8], _>((core::ops::Bound::Included(&prefix[..]), core::ops::Bound::Unbounded))
                .take_while(move |(k, _)| k.starts_with(&prefix))
                .map(|(k, v)| (k.as_slice(), v)),
        )
    }

    fn scan_all(&self) -> KvIter<'_, V> {
        Box::new(self.map.iter().map(|(k, v)| (k.as_slice(), v)))
    }

    fn len(&self) -> usize {
        self.map.len()
    }
}
