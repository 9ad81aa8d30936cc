//! On-disk layout of a data directory:
//!
//! ```text
//! kb/snapshot   NodeRow records, grouped by profile
//! kb/log        replace/delete records appended since the snapshot
//! sim/snapshot  similarity edges
//! sim/log       upsert/delete records appended since the snapshot
//! idx/snapshot  index entries; trusted only when kb/log is empty
//! ```
//!
//! Every file is a sequence of frames: a little-endian `u32` byte length
//! followed by that many bytes of UTF-8 JSON. A frame cut short at the end
//! of a log (a crash mid-append) is ignored.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use provlink_core::indexer::{IndexEntry, NestedObject, SummaryBag};
use provlink_core::kb::{NodeRow, RowKind};
use provlink_core::{ProfileId, ProvPair, SimilarityEdge};

use crate::error::{Error, Result};
use crate::jsonl::{EdgeDoc, ProvDoc};

pub fn encode_frame(out: &mut Vec<u8>, value: &impl Serialize) {
    let json = serde_json::to_vec(value).expect("record types always serialize");
    let len = u32::try_from(json.len()).expect("record larger than 4 GiB");
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(&json);
}

/// Splits `bytes` into complete frames; a truncated final frame is dropped.
pub fn split_frames(bytes: &[u8]) -> Vec<&[u8]> {
    let mut frames = Vec::new();
    let mut rest = bytes;
    while rest.len() >= 4 {
        let len = u32::from_le_bytes(rest[..4].try_into().expect("4 bytes")) as usize;
        if rest.len() - 4 < len {
            break;
        }
        frames.push(&rest[4..4 + len]);
        rest = &rest[4 + len..];
    }
    frames
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    match File::open(path) {
        Ok(mut f) => {
            let mut buf = Vec::new();
            f.read_to_end(&mut buf).map_err(|e| Error::io(path, e))?;
            Ok(buf)
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(Error::io(path, e)),
    }
}

fn decode<T: DeserializeOwned>(path: &Path, frame: &[u8]) -> Result<T> {
    serde_json::from_slice(frame).map_err(|e| Error::Corrupt { path: path.to_path_buf(), message: e.to_string() })
}

/// Reads every complete record of a framed file; a missing file is empty.
pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let bytes = read_file(path)?;
    split_frames(&bytes).into_iter().map(|f| decode(path, f)).collect()
}

/// Replaces `path` with the given records via a temporary file and rename.
pub fn write_records<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<()> {
    let dir = path.parent().expect("data files live in a directory");
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = path.with_extension("tmp");
    {
        let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        let mut buf = Vec::new();
        for r in records {
            buf.clear();
            encode_frame(&mut buf, &r);
            w.write_all(&buf).map_err(|e| Error::io(&tmp, e))?;
        }
        let file = w.into_inner().map_err(|e| Error::io(&tmp, e.into_error()))?;
        file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Append-only framed log.
#[derive(Debug)]
pub struct Journal {
    path: PathBuf,
    file: File,
}

impl Journal {
    pub fn open(path: &Path) -> Result<Self> {
        let dir = path.parent().expect("data files live in a directory");
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self { path: path.to_path_buf(), file })
    }

    /// Appends pre-encoded frames in a single write.
    pub fn append(&mut self, frames: &[u8]) -> Result<()> {
        if frames.is_empty() {
            return Ok(());
        }
        self.file.write_all(frames).map_err(|e| Error::io(&self.path, e))?;
        self.file.flush().map_err(|e| Error::io(&self.path, e))
    }

    pub fn truncate(&mut self) -> Result<()> {
        self.file.set_len(0).map_err(|e| Error::io(&self.path, e))
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.file.metadata().map_err(|e| Error::io(&self.path, e))?.len() == 0)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

pub(crate) fn prov_docs(prov: &[ProvPair]) -> Vec<ProvDoc> {
    prov.iter().map(|p| ProvDoc { pkey: p.pkey.clone(), pvalue: p.pvalue.clone() }).collect()
}

pub(crate) fn prov_pairs(prov: Vec<ProvDoc>) -> Vec<ProvPair> {
    prov.into_iter().map(|p| ProvPair { pkey: p.pkey, pvalue: p.pvalue }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowDoc {
    pub profile_id: String,
    pub kind: String,
    pub key: String,
    pub value_or_target: String,
    pub prov: Vec<ProvDoc>,
    pub seq: u32,
}

impl From<&NodeRow> for RowDoc {
    fn from(r: &NodeRow) -> Self {
        Self {
            profile_id: r.profile_id.to_string(),
            kind: r.kind.as_str().to_string(),
            key: r.key.clone(),
            value_or_target: r.value_or_target.clone(),
            prov: prov_docs(&r.prov),
            seq: r.seq,
        }
    }
}

impl RowDoc {
    pub fn into_row(self, path: &Path) -> Result<NodeRow> {
        let corrupt = |message: String| Error::Corrupt { path: path.to_path_buf(), message };
        let kind = RowKind::parse(&self.kind).ok_or_else(|| corrupt(format!("unknown row kind {:?}", self.kind)))?;
        Ok(NodeRow {
            profile_id: ProfileId::new(self.profile_id).map_err(|e| corrupt(e.to_string()))?,
            kind,
            key: self.key,
            value_or_target: self.value_or_target,
            prov: prov_pairs(self.prov),
            seq: self.seq,
        })
    }
}

/// Header of a knowledge-base log entry. A `replace` is followed by `rows`
/// row frames holding the profile's new content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum KbOp {
    Replace { profile_id: String, rows: usize },
    Delete { profile_id: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum SimOp {
    Upsert { edge: EdgeDoc },
    Delete { id1: String, id2: String },
}

impl SimOp {
    pub fn upsert(e: &SimilarityEdge) -> Self {
        SimOp::Upsert { edge: EdgeDoc::from(e) }
    }

    pub fn delete(a: &ProfileId, b: &ProfileId) -> Self {
        SimOp::Delete { id1: a.to_string(), id2: b.to_string() }
    }
}

/// A replayed knowledge-base change.
#[derive(Debug, Clone, PartialEq)]
pub enum KbChange {
    Replace(ProfileId, Vec<NodeRow>),
    Delete(ProfileId),
}

pub fn encode_replace(out: &mut Vec<u8>, id: &ProfileId, rows: &[NodeRow]) {
    encode_frame(out, &KbOp::Replace { profile_id: id.to_string(), rows: rows.len() });
    for r in rows {
        encode_frame(out, &RowDoc::from(r));
    }
}

pub fn encode_delete(out: &mut Vec<u8>, id: &ProfileId) {
    encode_frame(out, &KbOp::Delete { profile_id: id.to_string() });
}

/// Decodes a knowledge-base log. A `replace` whose rows were not all written
/// is dropped together with anything after it.
pub fn read_kb_log(path: &Path) -> Result<Vec<KbChange>> {
    let bytes = read_file(path)?;
    let frames = split_frames(&bytes);
    let mut out = Vec::new();
    let mut i = 0;
    while i < frames.len() {
        let op: KbOp = decode(path, frames[i])?;
        i += 1;
        match op {
            KbOp::Replace { profile_id, rows } => {
                if frames.len() - i < rows {
                    break;
                }
                let id = ProfileId::new(profile_id)
                    .map_err(|e| Error::Corrupt { path: path.to_path_buf(), message: e.to_string() })?;
                let rows = frames[i..i + rows]
                    .iter()
                    .map(|f| decode::<RowDoc>(path, f)?.into_row(path))
                    .collect::<Result<Vec<_>>>()?;
                i += rows.len();
                out.push(KbChange::Replace(id, rows));
            }
            KbOp::Delete { profile_id } => {
                let id = ProfileId::new(profile_id)
                    .map_err(|e| Error::Corrupt { path: path.to_path_buf(), message: e.to_string() })?;
                out.push(KbChange::Delete(id));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectDoc {
    pub key: String,
    pub words: Vec<String>,
    pub prov: Vec<ProvDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntryDoc {
    pub id: String,
    pub bag: Vec<String>,
    pub objects: Vec<ObjectDoc>,
    pub targets: Vec<String>,
}

impl From<&IndexEntry> for IndexEntryDoc {
    fn from(e: &IndexEntry) -> Self {
        Self {
            id: e.id.to_string(),
            bag: e.bag.words.iter().cloned().collect(),
            objects: e
                .objects
                .iter()
                .map(|o| ObjectDoc { key: o.key.clone(), words: o.words.iter().cloned().collect(), prov: prov_docs(&o.prov) })
                .collect(),
            targets: e.targets.iter().map(ToString::to_string).collect(),
        }
    }
}

impl IndexEntryDoc {
    pub fn into_entry(self, path: &Path) -> Result<IndexEntry> {
        let id = |s: String| {
            ProfileId::new(s).map_err(|e| Error::Corrupt { path: path.to_path_buf(), message: e.to_string() })
        };
        Ok(IndexEntry {
            id: id(self.id)?,
            bag: SummaryBag { words: self.bag.into_iter().collect() },
            objects: self
                .objects
                .into_iter()
                .map(|o| NestedObject { key: o.key, words: o.words.into_iter().collect(), prov: prov_pairs(o.prov) })
                .collect(),
            targets: self.targets.into_iter().map(id).collect::<Result<_>>()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torn_tail_is_ignored() {
        let mut buf = Vec::new();
        encode_frame(&mut buf, &serde_json::json!({"a": 1}));
        encode_frame(&mut buf, &serde_json::json!({"b": 2}));
        let full = buf.len();
        assert_eq!(split_frames(&buf).len(), 2);
        for cut in 1..(full - split_frames(&buf)[0].len() - 4) {
            assert_eq!(split_frames(&buf[..full - cut]).len(), 1, "cut {cut}");
        }
    }

    #[test]
    fn frame_prefix_is_little_endian_length() {
        let mut buf = Vec::new();
        encode_frame(&mut buf, &serde_json::json!("xy"));
        assert_eq!(&buf[..4], &4u32.to_le_bytes());
        assert_eq!(&buf[4..], b"\"xy\"");
    }
}
