//! Data directories survive reopening, checkpoints and torn log tails.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use provlink::config::Settings;
use provlink::{ingest, Engine};
use provlink_core::{Layout, Profile, ProfileId, Verdict};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn id(s: &str) -> ProfileId {
    ProfileId::new(s).unwrap()
}

fn populated(dir: &Path, settings: Settings) -> Engine {
    let mut e = Engine::open(dir, settings).unwrap();
    ingest::ingest_jsonl(&mut e, &fixture("sample.jsonl")).unwrap();
    e.link_all().unwrap();
    e.confirm(&id("L1"), &id("L2"), Verdict::ConfirmedNonmatch).unwrap();
    e
}

fn state(e: &Engine) -> (Vec<Profile>, Vec<provlink_core::SimilarityEdge>, Vec<(ProfileId, f64)>) {
    (e.kb().scan_profiles().collect(), e.sim().edges(), e.search("john brown", 10))
}

#[test]
fn reopen_replays_logs_without_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let before = state(&populated(dir.path(), Settings::default()));
    let reopened = Engine::open(dir.path(), Settings::default()).unwrap();
    assert_eq!(state(&reopened), before);
}

#[test]
fn reopen_after_checkpoint_uses_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let mut e = populated(dir.path(), Settings::default());
    e.checkpoint().unwrap();
    let before = state(&e);
    for sub in ["kb", "sim"] {
        assert_eq!(std::fs::metadata(dir.path().join(sub).join("log")).unwrap().len(), 0);
    }
    assert!(dir.path().join("idx").join("snapshot").exists());
    let reopened = Engine::open(dir.path(), Settings::default()).unwrap();
    assert_eq!(state(&reopened), before);
    assert_eq!(reopened.index().stats(), e.index().stats());
}

#[test]
fn writes_after_checkpoint_are_kept() {
    let dir = tempfile::tempdir().unwrap();
    let mut e = populated(dir.path(), Settings::default());
    e.checkpoint().unwrap();
    e.delete_profile(&id("L2")).unwrap();
    let extra = ingest::ingest_jsonl(&mut e, &fixture("sample.jsonl")).unwrap();
    assert_eq!(extra.accepted, 4);
    e.delete_profile(&id("P2")).unwrap();
    let before = state(&e);
    let reopened = Engine::open(dir.path(), Settings::default()).unwrap();
    assert_eq!(state(&reopened), before);
    assert!(reopened.profile(&id("P2")).is_err());
    assert!(reopened.sim().neighbors(&id("P2")).is_empty());
}

#[test]
fn torn_log_tail_is_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let before = state(&populated(dir.path(), Settings::default()));
    for sub in ["kb", "sim"] {
        let mut f = OpenOptions::new().append(true).open(dir.path().join(sub).join("log")).unwrap();
        // A length prefix promising more bytes than follow.
        f.write_all(&[200, 0, 0, 0, b'{', b'"']).unwrap();
    }
    let reopened = Engine::open(dir.path(), Settings::default()).unwrap();
    assert_eq!(state(&reopened), before);
}

#[test]
fn stale_index_snapshot_is_rebuilt() {
    let dir = tempfile::tempdir().unwrap();
    let mut e = populated(dir.path(), Settings::default());
    e.checkpoint().unwrap();
    let conf = Settings::load(&fixture("provlink.conf")).unwrap();
    let with_aliases = Engine::open(dir.path(), conf).unwrap();
    // Different analyzer, so the snapshot is not trusted.
    assert!(with_aliases.search("robert", 5).iter().any(|(h, _)| *h == id("P2")));
    assert!(e.search("robert", 5).is_empty());
}

#[test]
fn every_layout_persists() {
    for layout in Layout::ALL {
        let dir = tempfile::tempdir().unwrap();
        let settings = Settings { layout, ..Settings::default() };
        let before = state(&populated(dir.path(), settings.clone()));
        let reopened = Engine::open(dir.path(), settings).unwrap();
        assert_eq!(reopened.sim().layout(), layout);
        assert_eq!(state(&reopened), before, "{layout}");
    }
}
