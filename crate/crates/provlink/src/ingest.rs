//! Bulk loading from JSONL profile documents, mapped CSV files and
//! subject/relation/object triples.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use provlink_core::{AttributeObject, Profile, ProfileId, ProvPair, RelationObject};

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::jsonl;

/// Outcome of one ingestion: accepted count and the rejected lines.
#[derive(Debug, Default)]
pub struct IngestReport {
    pub accepted: usize,
    pub errors: Vec<Error>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// One profile document per line; blank lines are skipped.
pub fn ingest_jsonl(engine: &mut Engine, path: &Path) -> Result<IngestReport> {
    let text = read(path)?;
    let mut report = IngestReport::default();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match jsonl::parse_profile(line, n + 1) {
            Ok(p) => {
                engine.upsert_profile(&p)?;
                report.accepted += 1;
            }
            Err(e) => report.errors.push(e),
        }
    }
    Ok(report)
}

/// Provenance column: its cell becomes a provenance pair on the value of
/// `owner` in the same row.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvColumn {
    pub owner: String,
    pub pkey: String,
}

/// How CSV columns become profile objects, read from TOML:
///
/// ```toml
/// id_column = "id"
/// type_value = "person"
///
/// [attributes]          # column = attribute key
/// name = "name"
///
/// [relations]           # column = relation key; cells hold target ids
/// employer = "works_for"
///
/// [provenance.name_until]
/// owner = "name"
/// pkey = "until"
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvMapping {
    pub id_column: String,
    #[serde(default)]
    pub type_value: Option<String>,
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
    #[serde(default)]
    pub relations: BTreeMap<String, String>,
    #[serde(default)]
    pub provenance: BTreeMap<String, ProvColumn>,
}

impl CsvMapping {
    pub fn parse(text: &str) -> Result<Self> {
        let mapping: CsvMapping = toml::from_str(text).map_err(|e| Error::Mapping(e.to_string()))?;
        let mut seen = vec![mapping.id_column.as_str()];
        let columns = mapping.attributes.keys().chain(mapping.relations.keys()).chain(mapping.provenance.keys());
        for col in columns {
            if seen.contains(&col.as_str()) {
                return Err(Error::Mapping(format!("column {col:?} is mapped twice")));
            }
            seen.push(col);
        }
        for (col, p) in &mapping.provenance {
            if !mapping.attributes.contains_key(&p.owner) && !mapping.relations.contains_key(&p.owner) {
                return Err(Error::Mapping(format!("provenance column {col:?} owns unmapped column {:?}", p.owner)));
            }
            if p.pkey.is_empty() {
                return Err(Error::Mapping(format!("provenance column {col:?} has an empty pkey")));
            }
        }
        if mapping.type_value.as_deref() == Some("") {
            return Err(Error::Mapping("type_value is empty".into()));
        }
        Ok(mapping)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    fn check_header(&self, header: &csv::StringRecord) -> Result<()> {
        let all = std::iter::once(&self.id_column)
            .chain(self.attributes.keys())
            .chain(self.relations.keys())
            .chain(self.provenance.keys());
        for col in all {
            if !header.iter().any(|h| h == col) {
                return Err(Error::Mapping(format!("unknown column {col:?}")));
            }
        }
        Ok(())
    }
}

fn record_to_profile(
    mapping: &CsvMapping,
    header: &csv::StringRecord,
    record: &csv::StringRecord,
) -> provlink_core::Result<Profile> {
    let cell = |col: &str| header.iter().position(|h| h == col).and_then(|i| record.get(i)).unwrap_or("").trim();
    let prov_of = |owner: &str| -> Vec<ProvPair> {
        mapping
            .provenance
            .iter()
            .filter(|(_, p)| p.owner == owner)
            .filter_map(|(col, p)| {
                let v = cell(col);
                (!v.is_empty()).then(|| ProvPair::new(&p.pkey, v))
            })
            .collect()
    };
    let id = ProfileId::new(cell(&mapping.id_column))?;
    let mut attributes = Vec::new();
    if let Some(t) = &mapping.type_value {
        attributes.push(AttributeObject::new("type", t.as_str()));
    }
    let mut relations = Vec::new();
    for col in header.iter() {
        let v = cell(col);
        if v.is_empty() {
            continue;
        }
        if let Some(key) = mapping.attributes.get(col) {
            attributes.push(AttributeObject { key: key.clone(), value: v.to_string(), prov: prov_of(col) });
        } else if let Some(key) = mapping.relations.get(col) {
            relations.push(RelationObject { key: key.clone(), target: ProfileId::new(v)?, prov: prov_of(col) });
        }
    }
    Profile::new(id, attributes, relations)
}

/// One profile per data row; empty cells produce no objects.
pub fn ingest_csv(engine: &mut Engine, path: &Path, mapping: &CsvMapping) -> Result<IngestReport> {
    let text = read(path)?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Mapping(e.to_string()))?.clone();
    mapping.check_header(&header)?;
    let mut report = IngestReport::default();
    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                report.errors.push(Error::Schema { line, message: e.to_string() });
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line() as usize);
        match record_to_profile(mapping, &header, &record) {
            Ok(p) => {
                engine.upsert_profile(&p)?;
                report.accepted += 1;
            }
            Err(e) => report.errors.push(Error::Schema { line, message: e.to_string() }),
        }
    }
    Ok(report)
}

fn normalize_mention(mention: &str) -> String {
    mention.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Deterministic id for a free-text mention: `M_` and the SHA-256 of the
/// whitespace-collapsed, lowercased mention in hex.
pub fn mention_id(mention: &str) -> ProfileId {
    let digest = Sha256::digest(normalize_mention(mention).as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    ProfileId::new(format!("M_{hex}")).expect("hex ids are valid")
}

struct Triple {
    subject: String,
    relation: String,
    object: String,
    prov: Vec<ProvPair>,
}

fn parse_triple(line: &str, n: usize) -> Result<Triple> {
    let schema = |message: String| Error::Schema { line: n, message };
    let fields: Vec<&str> = line.split('\t').collect();
    if !(3..=4).contains(&fields.len()) {
        return Err(schema(format!("expected 3 or 4 tab-separated fields, found {}", fields.len())));
    }
    let [subject, relation, object] = [fields[0], fields[1], fields[2]].map(str::trim);
    if subject.is_empty() || relation.is_empty() || object.is_empty() {
        return Err(schema("subject, relation and object must be non-empty".into()));
    }
    let mut prov = Vec::new();
    if let Some(tail) = fields.get(3) {
        for part in tail.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| schema(format!("provenance {part:?} is not pkey=pvalue")))?;
            prov.push(ProvPair::new(k.trim(), v.trim()));
        }
    }
    Ok(Triple { subject: subject.into(), relation: relation.into(), object: object.into(), prov })
}

/// `subject<TAB>relation<TAB>object[<TAB>pkey=pvalue;...]` per line. Each
/// mention becomes (or extends) a profile named after it; each triple adds a
/// relation from subject to object. Returns the number of profiles touched.
pub fn ingest_triples(engine: &mut Engine, path: &Path) -> Result<IngestReport> {
    let text = read(path)?;
    let mut report = IngestReport::default();
    let mut touched: BTreeMap<ProfileId, (String, Vec<RelationObject>)> = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let t = match parse_triple(line, n + 1) {
            Ok(t) => t,
            Err(e) => {
                report.errors.push(e);
                continue;
            }
        };
        let (sid, oid) = (mention_id(&t.subject), mention_id(&t.object));
        touched.entry(oid.clone()).or_insert_with(|| (t.object.clone(), Vec::new()));
        let rel = RelationObject { key: t.relation, target: oid, prov: t.prov };
        touched.entry(sid).or_insert_with(|| (t.subject.clone(), Vec::new())).1.push(rel);
    }
    for (id, (name, rels)) in touched {
        let (mut attributes, mut relations) = match engine.profile(&id) {
            Ok(existing) => (existing.attributes().to_vec(), existing.relations().to_vec()),
            Err(_) => (vec![AttributeObject::new("name", name)], Vec::new()),
        };
        relations.extend(rels);
        attributes.dedup();
        let p = match Profile::new(id, attributes, relations) {
            Ok(p) => p,
            Err(e) => {
                report.errors.push(Error::Schema { line: 0, message: e.to_string() });
                continue;
            }
        };
        engine.upsert_profile(&p)?;
        report.accepted += 1;
    }
    Ok(report)
}
