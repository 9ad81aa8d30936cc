use alloc::collections::BTreeMap;
use alloc::vec;

use proptest::prelude::*;

use super::*;
use crate::analyzers::Analyzer;
use crate::profile::fixtures::{id, sample};
use crate::profile::AttributeObject;
use crate::sim::{Layout, DEFAULT_TAU_STORE};

struct World {
    kb: BTreeMap<ProfileId, Profile>,
    index: Index,
    cfg: MatchConfig,
}

impl World {
    fn of(profiles: Vec<Profile>) -> Self {
        let cfg = MatchConfig::default();
        let kb: BTreeMap<ProfileId, Profile> = profiles.into_iter().map(|p| (p.id().clone(), p)).collect();
        let mut index = Index::new(Analyzer::default(), &cfg);
        index.rebuild(kb.values(), |t| kb.get(t).cloned());
        Self { kb, index, cfg }
    }

    fn link_all(&self, store: &mut dyn SimStore) -> LinkRunStats {
        link_all(&self.index, |t| self.kb.get(t).cloned(), store, &self.cfg).unwrap()
    }
}

fn pair(a: &str, b: &str) -> (ProfileId, ProfileId) {
    (id(a), id(b))
}

fn edge_pairs(store: &dyn SimStore) -> Vec<(ProfileId, ProfileId)> {
    store.edges().into_iter().map(|e| (e.id1, e.id2)).collect()
}

#[test]
fn predict_examples() {
    let cfg = MatchConfig::default();
    assert_eq!(predict(cfg.tau_match, 0, &cfg), Decision::Match);
    assert_eq!(predict(10.0, cfg.rho_max + 1, &cfg), Decision::Pending);
    assert_eq!(predict(0.49, 0, &cfg), Decision::Nonmatch);
    assert_eq!(predict(1.0, 0, &cfg), Decision::Pending);
}

#[test]
fn verdict_parsing() {
    assert_eq!("match".parse::<Verdict>().unwrap(), Verdict::ConfirmedMatch);
    assert_eq!("confirmed_nonmatch".parse::<Verdict>().unwrap(), Verdict::ConfirmedNonmatch);
    assert!("maybe".parse::<Verdict>().is_err());
}

#[test]
fn link_profile_p1_on_sample() {
    let world = World::of(sample());
    let mut store = Layout::KvDual.create(DEFAULT_TAU_STORE);
    let edges = link_profile(&id("P1"), &world.index, |t| world.kb.get(t).cloned(), &mut *store, &world.cfg).unwrap();
    let p1p2 = edges.iter().find(|e| (e.id1.clone(), e.id2.clone()) == pair("P1", "P2")).unwrap();
    assert!(p1p2.simsc >= world.cfg.tau_match);
    assert_eq!(p1p2.decision, Decision::Match);
    assert!(!p1p2.cfm);

    let missing = link_profile(&id("NOPE"), &world.index, |t| world.kb.get(t).cloned(), &mut *store, &world.cfg);
    assert!(matches!(missing, Err(Error::NotFound(_))));
}

#[test]
fn lonely_profile_links_nothing() {
    let world = World::of(vec![
        Profile::new(id("A"), vec![AttributeObject::new("name", "xyzzy")], vec![]).unwrap(),
        Profile::new(id("B"), vec![AttributeObject::new("name", "plugh")], vec![]).unwrap(),
    ]);
    let mut store = Layout::KvSingle.create(DEFAULT_TAU_STORE);
    let edges = link_profile(&id("A"), &world.index, |t| world.kb.get(t).cloned(), &mut *store, &world.cfg).unwrap();
    assert!(edges.is_empty());
}

#[test]
fn link_all_on_sample() {
    let world = World::of(sample());
    for layout in Layout::ALL {
        let mut store = layout.create(DEFAULT_TAU_STORE);
        let stats = world.link_all(&mut *store);
        assert_eq!(stats.profiles_processed, 4);
        assert!(stats.pairs_scored >= 1);
        assert!(stats.edges_upserted + stats.edges_pruned <= stats.pairs_scored);
        assert_eq!(edge_pairs(&*store), [pair("L1", "L2"), pair("P1", "P2")], "{layout}");
        let l = store.get_edge(&id("L1"), &id("L2")).unwrap();
        assert_eq!((l.decision, l.rejsc, l.cfm), (Decision::Pending, 1, false));
    }
}

#[test]
fn empty_kb_gives_zero_stats() {
    let world = World::of(vec![]);
    let mut store = Layout::IndexedTable.create(DEFAULT_TAU_STORE);
    assert_eq!(world.link_all(&mut *store), LinkRunStats::default());
}

#[test]
fn link_all_is_idempotent() {
    let world = World::of(sample());
    let mut store = Layout::KvSingle.create(DEFAULT_TAU_STORE);
    world.link_all(&mut *store);
    let first = store.edges();
    world.link_all(&mut *store);
    assert_eq!(store.edges(), first);
}

#[test]
fn confirmation_is_sticky() {
    let world = World::of(sample());
    let mut store = Layout::KvDual.create(DEFAULT_TAU_STORE);
    world.link_all(&mut *store);
    let e = confirm(&mut *store, &id("L2"), &id("L1"), Verdict::ConfirmedNonmatch).unwrap();
    assert!(e.cfm && e.decision == Decision::Nonmatch);
    confirm(&mut *store, &id("P1"), &id("P2"), Verdict::ConfirmedMatch).unwrap();
    for _ in 0..3 {
        world.link_all(&mut *store);
        let l = store.get_edge(&id("L1"), &id("L2")).unwrap();
        assert!(l.cfm && l.decision == Decision::Nonmatch);
        let p = store.get_edge(&id("P1"), &id("P2")).unwrap();
        assert!(p.cfm && p.decision == Decision::Match);
    }
    assert!(matches!(
        confirm(&mut *store, &id("P1"), &id("L2"), Verdict::ConfirmedMatch),
        Err(Error::EdgeNotFound(..))
    ));
}

#[test]
fn edits_prune_unconfirmed_and_keep_confirmed() {
    let mut world = World::of(sample());
    let mut store = Layout::IndexedTable.create(DEFAULT_TAU_STORE);
    world.link_all(&mut *store);
    confirm(&mut *store, &id("L1"), &id("L2"), Verdict::ConfirmedNonmatch).unwrap();

    // P2 and L2 change so that nothing is shared any more.
    for (pid, name) in [("P2", "Zed"), ("L2", "Qux")] {
        let p = Profile::new(id(pid), vec![AttributeObject::new("name", name)], vec![]).unwrap();
        world.kb.insert(id(pid), p.clone());
        let kb = world.kb.clone();
        world.index.index_profile(&p, |t| kb.get(t).cloned());
    }
    let stats = world.link_all(&mut *store);
    assert!(stats.edges_pruned >= 1);
    assert_eq!(edge_pairs(&*store), [pair("L1", "L2")]);
    assert!(store.get_edge(&id("L1"), &id("L2")).unwrap().cfm);
}

#[test]
fn stepped_run_matches_link_all() {
    let world = World::of(sample());
    let mut a = Layout::KvDual.create(DEFAULT_TAU_STORE);
    let stats = world.link_all(&mut *a);
    let mut b = Layout::KvDual.create(DEFAULT_TAU_STORE);
    let mut run = LinkRun::new();
    for pid in world.index.ids() {
        run.step(pid, &world.index, |t| world.kb.get(t).cloned(), &mut *b, &world.cfg).unwrap();
    }
    run.step(&id("GONE"), &world.index, |t| world.kb.get(t).cloned(), &mut *b, &world.cfg).unwrap();
    assert_eq!(run.stats(), stats);
    assert_eq!(a.edges(), b.edges());
}

fn person(n: usize, name: &str, year: u16) -> Profile {
    Profile::new(
        id(&alloc::format!("Q{n}")),
        vec![
            AttributeObject::new("type", "person"),
            AttributeObject::new("name", name),
            AttributeObject::new("bdate", alloc::format!("{year}-01-01")),
        ],
        vec![],
    )
    .unwrap()
}

proptest! {
    #[test]
    fn edges_respect_invariants(
        people in prop::collection::vec((prop::sample::select(vec!["ann lee", "anne lee", "bob ray", "rob ray", "cy"]), 1970u16..1973), 2..12)
    ) {
        let profiles: Vec<Profile> = people.iter().enumerate().map(|(i, (n, y))| person(i, n, *y)).collect();
        let world = World::of(profiles);
        let mut a = Layout::KvSingle.create(DEFAULT_TAU_STORE);
        let mut b = Layout::IndexedTable.create(DEFAULT_TAU_STORE);
        world.link_all(&mut *a);
        world.link_all(&mut *b);
        prop_assert_eq!(a.edges(), b.edges());
        for e in a.edges() {
            prop_assert!(e.id1 < e.id2);
            prop_assert!(e.simsc >= DEFAULT_TAU_STORE);
            prop_assert_eq!(e.decision, predict(e.simsc, e.rejsc, &world.cfg));
        }
    }
}
