//! Node and relation-edge storage: one row per attribute or relation value,
//! with its provenance, keyed by profile id and ordinal.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kv::{Key, MemKv, OrderedKv};
use crate::profile::{AttributeObject, Profile, ProfileId, ProvPair, RelationObject};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RowKind {
    Attribute,
    Relation,
}

impl RowKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RowKind::Attribute => "attribute",
            RowKind::Relation => "relation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "attribute" => Some(RowKind::Attribute),
            "relation" => Some(RowKind::Relation),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRow {
    pub profile_id: ProfileId,
    pub kind: RowKind,
    pub key: String,
    pub value_or_target: String,
    pub prov: Vec<ProvPair>,
    /// Ordinal within the profile; attributes come first.
    pub seq: u32,
}

impl NodeRow {
    /// Rows for a profile: attributes then relations, numbered from 0.
    pub fn from_profile(p: &Profile) -> Vec<NodeRow> {
        let attrs = p.attributes().iter().map(|a| (RowKind::Attribute, &a.key, a.value.as_str(), &a.prov));
        let rels = p.relations().iter().map(|r| (RowKind::Relation, &r.key, r.target.as_str(), &r.prov));
        attrs
            .chain(rels)
            .enumerate()
            .map(|(seq, (kind, key, value, prov))| NodeRow {
                profile_id: p.id().clone(),
                kind,
                key: key.clone(),
                value_or_target: value.into(),
                prov: prov.clone(),
                seq: seq as u32,
            })
            .collect()
    }

    /// Reassembles a profile from its rows (any order).
    pub fn to_profile(id: ProfileId, rows: &[NodeRow]) -> Result<Profile> {
        let mut sorted: Vec<&NodeRow> = rows.iter().collect();
        sorted.sort_by_key(|r| r.seq);
        let mut attributes = Vec::new();
        let mut relations = Vec::new();
        for row in sorted {
            match row.kind {
                RowKind::Attribute => attributes.push(AttributeObject {
                    key: row.key.clone(),
                    value: row.value_or_target.clone(),
                    prov: row.prov.clone(),
                }),
                RowKind::Relation => relations.push(RelationObject {
                    key: row.key.clone(),
                    target: ProfileId::new(row.value_or_target.clone())?,
                    prov: row.prov.clone(),
                }),
            }
        }
        Profile::new(id, attributes, relations)
    }
}

fn row_key(id: &ProfileId, seq: u32) -> Key {
    let mut key = id_prefix(id);
    key.extend_from_slice(format!("{seq:010}").as_bytes());
    key
}

fn id_prefix(id: &ProfileId) -> Key {
    let mut key = Key::new();
    key.extend_from_slice(id.as_str().as_bytes());
    key.push(0);
    key
}

/// Profile rows over an ordered key-value store. Keys are
/// `profile_id 0x00 zero-padded-seq`, so a prefix scan yields one profile.
#[derive(Debug, Clone, Default)]
pub struct KbStore<K = MemKv<NodeRow>> {
    rows: K,
    /// Registered ids and their row counts; profiles may have no rows.
    ids: BTreeMap<ProfileId, u32>,
}

impl KbStore<MemKv<NodeRow>> {
    pub fn new() -> Self {
        Self::default()
    }
}

impl<K: OrderedKv<NodeRow>> KbStore<K> {
    pub fn with_substrate(rows: K) -> Self {
        Self { rows, ids: BTreeMap::new() }
    }

    /// Replaces every row of `p.id` with rows derived from `p`; returns them.
    pub fn put_profile(&mut self, p: &Profile) -> Vec<NodeRow> {
        let rows = NodeRow::from_profile(p);
        self.put_rows(p.id().clone(), rows.clone());
        rows
    }

    /// Replaces the rows of `id`. Used when replaying a log.
    pub fn put_rows(&mut self, id: ProfileId, rows: Vec<NodeRow>) {
        self.remove_rows(&id);
        self.ids.insert(id.clone(), rows.len() as u32);
        for row in rows {
            self.rows.insert(row_key(&id, row.seq), row);
        }
    }

    fn remove_rows(&mut self, id: &ProfileId) {
        if let Some(count) = self.ids.get(id) {
            for seq in 0..*count {
                self.rows.remove(&row_key(id, seq));
            }
        }
    }

    pub fn get_profile(&self, id: &ProfileId) -> Result<Profile> {
        if !self.ids.contains_key(id) {
            return Err(Error::NotFound(id.clone()));
        }
        NodeRow::to_profile(id.clone(), &self.rows_of(id))
    }

    /// Removes `id` and its rows; returns whether it existed.
    pub fn delete_profile(&mut self, id: &ProfileId) -> bool {
        self.remove_rows(id);
        self.ids.remove(id).is_some()
    }

    pub fn contains(&self, id: &ProfileId) -> bool {
        self.ids.contains_key(id)
    }

    pub fn rows_of(&self, id: &ProfileId) -> Vec<NodeRow> {
        self.rows.scan_prefix(&id_prefix(id)).map(|(_, r)| r.clone()).collect()
    }

    /// Every stored profile once, ascending id.
    pub fn scan_profiles(&self) -> impl Iterator<Item = Profile> + '_ {
        self.ids.keys().filter_map(|id| self.get_profile(id).ok())
    }

    pub fn ids(&self) -> impl Iterator<Item = &ProfileId> {
        self.ids.keys()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::fixtures::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn put_writes_one_row_per_object() {
        let mut kb = KbStore::new();
        assert_eq!(kb.put_profile(&p1()).len(), 7);
        assert_eq!(kb.row_count(), 7);
        let rows = kb.rows_of(&id("P1"));
        assert_eq!(rows.iter().filter(|r| r.kind == RowKind::Attribute).count(), 4);
        assert_eq!(rows.iter().filter(|r| r.kind == RowKind::Relation).count(), 3);

        kb.put_profile(&p4());
        assert_eq!(kb.rows_of(&id("L2")).len(), 4);

        let x = Profile::new(id("X"), vec![], vec![]).unwrap();
        assert!(kb.put_profile(&x).is_empty());
        assert!(kb.contains(&id("X")));
        assert_eq!(kb.get_profile(&id("X")).unwrap(), x);
    }

    #[test]
    fn round_trip_and_not_found() {
        let mut kb = KbStore::new();
        for p in sample() {
            kb.put_profile(&p);
        }
        assert_eq!(kb.get_profile(&id("P1")).unwrap(), p1());
        let l1 = kb.get_profile(&id("L1")).unwrap();
        assert_eq!(l1, p3());
        assert_eq!(l1.relations()[0].prov, [ProvPair::new("from", "1989")]);
        assert_eq!(kb.get_profile(&id("NOPE")), Err(Error::NotFound(id("NOPE"))));
    }

    #[test]
    fn replace_drops_stale_rows() {
        let mut kb = KbStore::new();
        kb.put_profile(&p1());
        let smaller = Profile::new(id("P1"), vec![AttributeObject::new("name", "John")], vec![]).unwrap();
        kb.put_profile(&smaller);
        assert_eq!(kb.row_count(), 1);
        assert_eq!(kb.get_profile(&id("P1")).unwrap(), smaller);
    }

    #[test]
    fn delete_is_idempotent_and_isolated() {
        let mut kb = KbStore::new();
        kb.put_profile(&p1());
        kb.put_profile(&p2());
        assert!(kb.delete_profile(&id("P1")));
        assert!(!kb.delete_profile(&id("P1")));
        assert!(!kb.delete_profile(&id("NOPE")));
        assert_eq!(kb.get_profile(&id("P1")), Err(Error::NotFound(id("P1"))));
        assert_eq!(kb.get_profile(&id("P2")).unwrap(), p2());
    }

    #[test]
    fn scan_is_ascending() {
        let mut kb = KbStore::new();
        assert_eq!(kb.scan_profiles().count(), 0);
        for p in sample() {
            kb.put_profile(&p);
        }
        let ids: Vec<String> = kb.scan_profiles().map(|p| p.id().to_string()).collect();
        assert_eq!(ids, ["L1", "L2", "P1", "P2"]);
        kb.delete_profile(&id("P1"));
        let ids: Vec<String> = kb.scan_profiles().map(|p| p.id().to_string()).collect();
        assert_eq!(ids, ["L1", "L2", "P2"]);
    }

    #[test]
    fn ids_sharing_a_prefix_do_not_mix() {
        let mut kb = KbStore::new();
        let a = Profile::new(id("P1"), vec![AttributeObject::new("n", "a")], vec![]).unwrap();
        let b = Profile::new(id("P10"), vec![AttributeObject::new("n", "b")], vec![]).unwrap();
        kb.put_profile(&a);
        kb.put_profile(&b);
        assert_eq!(kb.get_profile(&id("P1")).unwrap(), a);
        assert_eq!(kb.get_profile(&id("P10")).unwrap(), b);
    }

    fn arb_prov() -> impl Strategy<Value = Vec<ProvPair>> {
        prop::collection::vec(
            prop_oneof![
                (1900u16..2030).prop_map(|y| ProvPair::new("from", format!("{y}"))),
                (1900u16..2030).prop_map(|y| ProvPair::new("until", format!("{y}"))),
                "[a-z]{1,5}".prop_map(|s| ProvPair::new("source", s)),
            ],
            0..3,
        )
    }

    prop_compose! {
        fn arb_profile()(
            pid in "[A-Z][0-9]{1,3}",
            attrs in prop::collection::vec(("[a-z]{1,6}", "[A-Za-z0-9 ]{1,10}", arb_prov()), 0..6),
            rels in prop::collection::vec(("[a-z_]{1,6}", "[A-Z][0-9]{1,3}", arb_prov()), 0..4),
        ) -> Profile {
            let attributes = attrs.into_iter()
                .map(|(k, v, prov)| AttributeObject { key: k, value: v, prov })
                .collect();
            let relations = rels.into_iter()
                .map(|(k, t, prov)| RelationObject { key: k, target: id(&t), prov })
                .collect();
            Profile::new(id(&pid), attributes, relations).unwrap()
        }
    }

    proptest! {
        #[test]
        fn put_get_round_trip(p in arb_profile()) {
            let mut kb = KbStore::new();
            let written = kb.put_profile(&p);
            prop_assert_eq!(written.len(), p.attributes().len() + p.relations().len());
            prop_assert_eq!(kb.get_profile(p.id()).unwrap(), p);
        }
    }
}
