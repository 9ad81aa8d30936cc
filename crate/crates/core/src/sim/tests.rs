use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::profile::fixtures::id;

fn edge(a: &str, b: &str, simsc: f64) -> SimilarityEdge {
    SimilarityEdge::new(id(a), id(b), simsc, 0).unwrap()
}

fn each_layout(f: impl Fn(Box<dyn SimStore + Send + Sync>)) {
    for layout in Layout::ALL {
        f(layout.create(DEFAULT_TAU_STORE));
    }
}

#[test]
fn layout_names_round_trip() {
    for layout in Layout::ALL {
        assert_eq!(layout.as_str().parse::<Layout>().unwrap(), layout);
    }
    assert!(matches!("btree".parse::<Layout>(), Err(Error::UnknownLayout(_))));
}

#[test]
fn record_counts_per_layout() {
    each_layout(|mut s| {
        s.upsert_edge(&edge("P1", "P2", 1.6)).unwrap();
        s.upsert_edge(&edge("P1", "P3", 0.9)).unwrap();
        let per_edge = if s.layout() == Layout::KvDual { 2 } else { 1 };
        assert_eq!(s.edge_count(), 2);
        assert_eq!(s.record_count(), 2 * per_edge);
        // Overwriting keeps one logical edge.
        s.upsert_edge(&edge("P1", "P2", 1.7)).unwrap();
        assert_eq!(s.edge_count(), 2);
        assert_eq!(s.get_edge(&id("P2"), &id("P1")).unwrap().simsc, 1.7);
    });
}

#[test]
fn below_threshold_is_rejected() {
    each_layout(|mut s| {
        let err = s.upsert_edge(&edge("P1", "P2", 0.49)).unwrap_err();
        assert!(matches!(err, Error::BelowThreshold { .. }));
        s.upsert_edge(&edge("P1", "P2", 0.5)).unwrap();
        assert_eq!(s.edge_count(), 1);
    });
}

#[test]
fn non_canonical_and_same_id() {
    each_layout(|mut s| {
        let mut e = edge("P1", "P2", 1.0);
        core::mem::swap(&mut e.id1, &mut e.id2);
        assert!(matches!(s.upsert_edge(&e), Err(Error::NonCanonicalPair(..))));
        assert!(matches!(s.get_edge(&id("P1"), &id("P1")), Err(Error::SameId(_))));
        assert!(matches!(s.get_edge(&id("P1"), &id("P9")), Err(Error::EdgeNotFound(..))));
    });
}

#[test]
fn neighbors_cover_both_ends() {
    each_layout(|mut s| {
        for (a, b) in [("P1", "P2"), ("P2", "P3"), ("P0", "P2"), ("P1", "P3"), ("P20", "P3")] {
            s.upsert_edge(&edge(a, b, 1.0)).unwrap();
        }
        let got: Vec<_> = s.neighbors(&id("P2")).into_iter().map(|e| (e.id1, e.id2)).collect();
        assert_eq!(got, [(id("P0"), id("P2")), (id("P1"), id("P2")), (id("P2"), id("P3"))], "{}", s.layout());
        assert!(s.neighbors(&id("P9")).is_empty());
    });
}

#[test]
fn delete_is_idempotent() {
    each_layout(|mut s| {
        s.upsert_edge(&edge("P1", "P2", 1.0)).unwrap();
        assert!(s.delete_edge(&id("P2"), &id("P1")));
        assert!(!s.delete_edge(&id("P1"), &id("P2")));
        assert_eq!(s.record_count(), 0);
        assert!(s.neighbors(&id("P1")).is_empty());
    });
}

#[test]
fn update_transaction_replaces_existing() {
    each_layout(|mut s| {
        s.upsert_edge(&edge("P1", "P2", 1.0)).unwrap();
        let batch = [edge("P1", "P2", 2.0), edge("P2", "P3", 0.7)];
        assert_eq!(s.update_transaction(&batch).unwrap(), 2);
        assert_eq!(s.edges(), batch);
        // A bad edge stops the batch; earlier ones stay applied.
        let batch = [edge("P1", "P4", 1.0), edge("P1", "P5", 0.1), edge("P1", "P6", 1.0)];
        assert!(s.update_transaction(&batch).is_err());
        assert!(s.contains_pair(&id("P4"), &id("P1")));
        assert!(!s.contains_pair(&id("P1"), &id("P6")));
    });
}

#[derive(Debug, Clone)]
enum Op {
    Upsert(u8, u8, u8),
    Delete(u8, u8),
    Get(u8, u8),
    Neighbors(u8),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0u8..12, 0u8..12, 0u8..=30).prop_map(|(a, b, s)| Op::Upsert(a, b, s)),
        (0u8..12, 0u8..12).prop_map(|(a, b)| Op::Delete(a, b)),
        (0u8..12, 0u8..12).prop_map(|(a, b)| Op::Get(a, b)),
        (0u8..12).prop_map(Op::Neighbors),
    ]
}

fn pid(n: u8) -> ProfileId {
    id(&alloc::format!("N{n}"))
}

proptest! {
    #[test]
    fn layouts_agree_with_map_model(ops in proptest::collection::vec(op(), 1..200)) {
        let mut stores: Vec<_> = Layout::ALL.iter().map(|l| l.create(DEFAULT_TAU_STORE)).collect();
        let mut model: BTreeMap<(ProfileId, ProfileId), f64> = BTreeMap::new();
        for op in ops {
            match op {
                Op::Upsert(a, b, s) => {
                    let simsc = f64::from(s) / 10.0;
                    let ok = a != b && simsc >= DEFAULT_TAU_STORE;
                    if a != b {
                        let e = SimilarityEdge::new(pid(a), pid(b), simsc, 0).unwrap();
                        for st in &mut stores {
                            prop_assert_eq!(st.update_transaction(core::slice::from_ref(&e)).is_ok(), ok);
                        }
                        if ok {
                            model.insert((e.id1, e.id2), simsc);
                        }
                    }
                }
                Op::Delete(a, b) => {
                    let (x, y) = if pid(a) < pid(b) { (pid(a), pid(b)) } else { (pid(b), pid(a)) };
                    let expected = model.remove(&(x, y)).is_some();
                    for st in &mut stores {
                        prop_assert_eq!(st.delete_edge(&pid(a), &pid(b)), expected);
                    }
                }
                Op::Get(a, b) => {
                    let (x, y) = if pid(a) < pid(b) { (pid(a), pid(b)) } else { (pid(b), pid(a)) };
                    let expected = model.get(&(x, y)).copied();
                    for st in &stores {
                        prop_assert_eq!(st.get_edge(&pid(a), &pid(b)).ok().map(|e| e.simsc), expected);
                    }
                }
                Op::Neighbors(a) => {
                    let expected: Vec<_> = model
                        .iter()
                        .filter(|((x, y), _)| *x == pid(a) || *y == pid(a))
                        .map(|((x, y), s)| (x.clone(), y.clone(), *s))
                        .collect();
                    for st in &stores {
                        let got: Vec<_> = st.neighbors(&pid(a)).into_iter().map(|e| (e.id1, e.id2, e.simsc)).collect();
                        prop_assert_eq!(&got, &expected);
                    }
                }
            }
        }
        for st in &stores {
            prop_assert_eq!(st.edge_count(), model.len());
        }
    }
}
