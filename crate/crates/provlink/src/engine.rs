//! The knowledge base, indexes and similarity store behind one write path,
//! optionally persisted to a data directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use provlink_core::indexer::NestedQuery;
use provlink_core::linker::{self, LinkRun};
use provlink_core::{
    Index, KbStore, LinkRunStats, Profile, ProfileId, SimStore, SimilarityEdge, Verdict,
};

use crate::config::Settings;
use crate::error::{Error, Result};
use crate::jsonl::EdgeDoc;
use crate::persist::{self, IndexEntryDoc, Journal, KbChange, RowDoc, SimOp};

type Store = Box<dyn SimStore + Send + Sync>;

/// Passes every call through to a store and encodes the writes as log frames.
struct Recording<'a> {
    inner: &'a mut Store,
    frames: Vec<u8>,
}

impl SimStore for Recording<'_> {
    fn layout(&self) -> provlink_core::Layout {
        self.inner.layout()
    }

    fn tau_store(&self) -> f64 {
        self.inner.tau_store()
    }

    fn upsert_edge(&mut self, e: &SimilarityEdge) -> provlink_core::Result<()> {
        self.inner.upsert_edge(e)?;
        persist::encode_frame(&mut self.frames, &SimOp::upsert(e));
        Ok(())
    }

    fn get_edge(&self, a: &ProfileId, b: &ProfileId) -> provlink_core::Result<SimilarityEdge> {
        self.inner.get_edge(a, b)
    }

    fn contains_pair(&self, a: &ProfileId, b: &ProfileId) -> bool {
        self.inner.contains_pair(a, b)
    }

    fn neighbors(&self, id: &ProfileId) -> Vec<SimilarityEdge> {
        self.inner.neighbors(id)
    }

    fn delete_edge(&mut self, a: &ProfileId, b: &ProfileId) -> bool {
        let removed = self.inner.delete_edge(a, b);
        if removed {
            persist::encode_frame(&mut self.frames, &SimOp::delete(a, b));
        }
        removed
    }

    fn edges(&self) -> Vec<SimilarityEdge> {
        self.inner.edges()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn record_count(&self) -> usize {
        self.inner.record_count()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexHeader {
    analyzer: String,
    entries: usize,
}

fn analyzer_fingerprint(settings: &Settings) -> String {
    let digest = Sha256::digest(format!("{:?}", settings.analyzer).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

struct Files {
    dir: PathBuf,
    kb_log: Journal,
    sim_log: Journal,
}

impl Files {
    fn kb_snapshot(&self) -> PathBuf {
        self.dir.join("kb").join("snapshot")
    }

    fn sim_snapshot(&self) -> PathBuf {
        self.dir.join("sim").join("snapshot")
    }

    fn idx_snapshot(&self) -> PathBuf {
        self.dir.join("idx").join("snapshot")
    }
}

pub struct Engine {
    settings: Settings,
    kb: KbStore,
    index: Index,
    sim: Store,
    files: Option<Files>,
}

impl Engine {
    pub fn in_memory(settings: Settings) -> Self {
        Self {
            kb: KbStore::new(),
            index: Index::new(settings.analyzer.clone(), &settings.cfg),
            sim: settings.layout.create(settings.cfg.tau_store),
            settings,
            files: None,
        }
    }

    /// Opens (or creates) a data directory and replays its snapshots and logs.
    pub fn open(dir: &Path, settings: Settings) -> Result<Self> {
        let files = Files {
            dir: dir.to_path_buf(),
            kb_log: Journal::open(&dir.join("kb").join("log"))?,
            sim_log: Journal::open(&dir.join("sim").join("log"))?,
        };
        let mut engine = Engine::in_memory(settings);

        let path = files.kb_snapshot();
        let mut current: Option<(ProfileId, Vec<provlink_core::NodeRow>)> = None;
        for doc in persist::read_records::<RowDoc>(&path)? {
            let row = doc.into_row(&path)?;
            match &mut current {
                Some((id, rows)) if *id == row.profile_id => rows.push(row),
                _ => {
                    if let Some((id, rows)) = current.take() {
                        engine.kb.put_rows(id, rows);
                    }
                    current = Some((row.profile_id.clone(), vec![row]));
                }
            }
        }
        if let Some((id, rows)) = current {
            engine.kb.put_rows(id, rows);
        }
        for change in persist::read_kb_log(files.kb_log.path())? {
            match change {
                KbChange::Replace(id, rows) => engine.kb.put_rows(id, rows),
                KbChange::Delete(id) => {
                    engine.kb.delete_profile(&id);
                }
            }
        }

        let path = files.sim_snapshot();
        let mut ops: Vec<SimOp> = persist::read_records::<EdgeDoc>(&path)?
            .into_iter()
            .map(|edge| SimOp::Upsert { edge })
            .collect();
        ops.extend(persist::read_records::<SimOp>(files.sim_log.path())?);
        for op in ops {
            match op {
                SimOp::Upsert { edge } => {
                    let edge = edge.into_edge()?;
                    match engine.sim.upsert_edge(&edge) {
                        Ok(()) | Err(provlink_core::Error::BelowThreshold { .. }) => {}
                        Err(e) => return Err(e.into()),
                    }
                }
                SimOp::Delete { id1, id2 } => {
                    engine.sim.delete_edge(&ProfileId::new(id1)?, &ProfileId::new(id2)?);
                }
            }
        }

        if !engine.restore_index(&files)? {
            let Engine { kb, index, .. } = &mut engine;
            let profiles: Vec<Profile> = kb.scan_profiles().collect();
            index.rebuild(&profiles, |t| kb.get_profile(t).ok());
        }
        engine.files = Some(files);
        Ok(engine)
    }

    /// Loads the index snapshot when it is known to match the knowledge base.
    fn restore_index(&mut self, files: &Files) -> Result<bool> {
        let path = files.idx_snapshot();
        if !files.kb_log.is_empty()? || !path.exists() {
            return Ok(false);
        }
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let frames = persist::split_frames(&bytes);
        let Some((head, rest)) = frames.split_first() else { return Ok(false) };
        let Ok(header) = serde_json::from_slice::<IndexHeader>(head) else { return Ok(false) };
        if header.analyzer != analyzer_fingerprint(&self.settings)
            || header.entries != rest.len()
            || rest.len() != self.kb.len()
        {
            return Ok(false);
        }
        let entries = rest
            .iter()
            .map(|f| {
                let doc: IndexEntryDoc = serde_json::from_slice(f)
                    .map_err(|e| Error::Corrupt { path: path.clone(), message: e.to_string() })?;
                doc.into_entry(&path)
            })
            .collect::<Result<Vec<_>>>()?;
        if entries.iter().any(|e| !self.kb.contains(&e.id)) {
            return Ok(false);
        }
        self.index.restore(entries);
        Ok(true)
    }

    /// Writes full snapshots and empties the logs.
    pub fn checkpoint(&mut self) -> Result<()> {
        let Some(files) = &mut self.files else { return Ok(()) };
        let rows: Vec<RowDoc> =
            self.kb.ids().flat_map(|id| self.kb.rows_of(id)).map(|r| RowDoc::from(&r)).collect();
        persist::write_records(&files.kb_snapshot(), rows)?;
        persist::write_records(&files.sim_snapshot(), self.sim.edges().iter().map(EdgeDoc::from))?;
        let header = IndexHeader { analyzer: analyzer_fingerprint(&self.settings), entries: self.index.len() };
        let header = serde_json::to_value(header).expect("header serializes");
        let entries = self.index.entries().map(|e| serde_json::to_value(IndexEntryDoc::from(e)).expect("serializes"));
        persist::write_records(&files.idx_snapshot(), std::iter::once(header).chain(entries))?;
        files.kb_log.truncate()?;
        files.sim_log.truncate()?;
        Ok(())
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    pub fn index(&self) -> &Index {
        &self.index
    }

    pub fn kb(&self) -> &KbStore {
        &self.kb
    }

    pub fn sim(&self) -> &dyn SimStore {
        &*self.sim
    }

    pub fn data_dir(&self) -> Option<&Path> {
        self.files.as_ref().map(|f| f.dir.as_path())
    }

    fn log_sim(&mut self, frames: Vec<u8>) -> Result<()> {
        match &mut self.files {
            Some(files) => files.sim_log.append(&frames),
            None => Ok(()),
        }
    }

    fn with_recording<T>(&mut self, f: impl FnOnce(&KbStore, &Index, &mut Recording<'_>) -> T) -> Result<T> {
        let mut rec = Recording { inner: &mut self.sim, frames: Vec::new() };
        let out = f(&self.kb, &self.index, &mut rec);
        let frames = rec.frames;
        self.log_sim(frames)?;
        Ok(out)
    }

    pub fn profile(&self, id: &ProfileId) -> Result<Profile> {
        Ok(self.kb.get_profile(id)?)
    }

    /// Stores `p` (replacing any previous version) and re-indexes it and the
    /// profiles that point at it.
    pub fn upsert_profile(&mut self, p: &Profile) -> Result<()> {
        let rows = self.kb.put_profile(p);
        if let Some(files) = &mut self.files {
            let mut frames = Vec::new();
            persist::encode_replace(&mut frames, p.id(), &rows);
            files.kb_log.append(&frames)?;
        }
        let Engine { kb, index, .. } = self;
        index.index_profile(p, |t| kb.get_profile(t).ok());
        Ok(())
    }

    /// Removes a profile, its index entries and every similarity edge on it.
    pub fn delete_profile(&mut self, id: &ProfileId) -> Result<bool> {
        if !self.kb.delete_profile(id) {
            return Ok(false);
        }
        if let Some(files) = &mut self.files {
            let mut frames = Vec::new();
            persist::encode_delete(&mut frames, id);
            files.kb_log.append(&frames)?;
        }
        let Engine { kb, index, .. } = self;
        index.remove_profile(id, |t| kb.get_profile(t).ok());
        self.with_recording(|_, _, store| {
            for e in store.neighbors(id) {
                store.delete_edge(&e.id1, &e.id2);
            }
        })?;
        Ok(true)
    }

    pub fn search(&self, q: &str, k: usize) -> Vec<(ProfileId, f64)> {
        self.index.keyword_search(q, k)
    }

    pub fn structured_search(&self, q: &NestedQuery) -> Result<Vec<ProfileId>> {
        Ok(self.index.nested_search(q)?)
    }

    /// Stored edges of a profile, highest score first.
    pub fn similar(&self, id: &ProfileId) -> Result<Vec<SimilarityEdge>> {
        if !self.kb.contains(id) {
            return Err(provlink_core::Error::NotFound(id.clone()).into());
        }
        let mut edges = self.sim.neighbors(id);
        edges.sort_by(|a, b| b.simsc.total_cmp(&a.simsc).then_with(|| (&a.id1, &a.id2).cmp(&(&b.id1, &b.id2))));
        Ok(edges)
    }

    pub fn link_profile(&mut self, id: &ProfileId) -> Result<Vec<SimilarityEdge>> {
        let cfg = self.settings.cfg.clone();
        self.with_recording(|kb, index, store| {
            linker::link_profile(id, index, |t| kb.get_profile(t).ok(), store, &cfg)
        })?
        .map_err(Error::from)
    }

    pub fn link_all(&mut self) -> Result<LinkRunStats> {
        let started = Instant::now();
        let cfg = self.settings.cfg.clone();
        let mut stats = self
            .with_recording(|kb, index, store| linker::link_all(index, |t| kb.get_profile(t).ok(), store, &cfg))??;
        stats.elapsed_seconds = started.elapsed().as_secs_f64();
        Ok(stats)
    }

    /// One step of an interleaved link run.
    pub fn link_step(&mut self, run: &mut LinkRun, id: &ProfileId) -> Result<()> {
        let cfg = self.settings.cfg.clone();
        self.with_recording(|kb, index, store| run.step(id, index, |t| kb.get_profile(t).ok(), store, &cfg))??;
        Ok(())
    }

    pub fn confirm(&mut self, a: &ProfileId, b: &ProfileId, verdict: Verdict) -> Result<SimilarityEdge> {
        Ok(self.with_recording(|_, _, store| linker::confirm(store, a, b, verdict))??)
    }

    /// Unconfirmed edges scoring at least `min_score`, highest first, ties by
    /// pair.
    pub fn pending(&self, min_score: f64, limit: usize) -> Vec<SimilarityEdge> {
        let mut edges: Vec<SimilarityEdge> =
            self.sim.edges().into_iter().filter(|e| !e.cfm && e.simsc >= min_score).collect();
        edges.sort_by(|a, b| b.simsc.total_cmp(&a.simsc).then_with(|| (&a.id1, &a.id2).cmp(&(&b.id1, &b.id2))));
        edges.truncate(limit);
        edges
    }
}
