//! The JSON profile document, one per line in `.jsonl` files and used as the
//! HTTP body for profiles:
//!
//! ```json
//! {"id":"P1","attributes":[{"key":"name","value":"Peter","prov":[{"pkey":"until","pvalue":"1991"}]}],
//!  "relations":[{"key":"lives_at","target":"L1","prov":[]}]}
//! ```

use serde::{Deserialize, Serialize};

use provlink_core::indexer::{NestedClause, NestedQuery};
use provlink_core::{AttributeObject, Decision, Profile, ProfileId, ProvPair, RelationObject, SimilarityEdge};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvDoc {
    pub pkey: String,
    pub pvalue: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeDoc {
    pub key: String,
    pub value: String,
    #[serde(default)]
    pub prov: Vec<ProvDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDoc {
    pub key: String,
    pub target: String,
    #[serde(default)]
    pub prov: Vec<ProvDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDoc {
    pub id: String,
    #[serde(default)]
    pub attributes: Vec<AttributeDoc>,
    #[serde(default)]
    pub relations: Vec<RelationDoc>,
}

fn prov_pairs(prov: &[ProvDoc]) -> Vec<ProvPair> {
    prov.iter().map(|p| ProvPair::new(&p.pkey, &p.pvalue)).collect()
}

fn prov_docs(prov: &[ProvPair]) -> Vec<ProvDoc> {
    prov.iter().map(|p| ProvDoc { pkey: p.pkey.clone(), pvalue: p.pvalue.clone() }).collect()
}

impl ProfileDoc {
    pub fn into_profile(self) -> provlink_core::Result<Profile> {
        let id = ProfileId::new(self.id)?;
        let attributes = self
            .attributes
            .into_iter()
            .map(|a| AttributeObject { prov: prov_pairs(&a.prov), key: a.key, value: a.value })
            .collect();
        let relations = self
            .relations
            .into_iter()
            .map(|r| Ok(RelationObject { prov: prov_pairs(&r.prov), key: r.key, target: ProfileId::new(r.target)? }))
            .collect::<provlink_core::Result<Vec<_>>>()?;
        Profile::new(id, attributes, relations)
    }
}

impl From<&Profile> for ProfileDoc {
    fn from(p: &Profile) -> Self {
        Self {
            id: p.id().to_string(),
            attributes: p
                .attributes()
                .iter()
                .map(|a| AttributeDoc { key: a.key.clone(), value: a.value.clone(), prov: prov_docs(&a.prov) })
                .collect(),
            relations: p
                .relations()
                .iter()
                .map(|r| RelationDoc { key: r.key.clone(), target: r.target.to_string(), prov: prov_docs(&r.prov) })
                .collect(),
        }
    }
}

/// Parses one JSONL line; `line` is 1-based and only used for errors.
pub fn parse_profile(text: &str, line: usize) -> Result<Profile> {
    let doc: ProfileDoc =
        serde_json::from_str(text).map_err(|e| Error::Schema { line, message: e.to_string() })?;
    doc.into_profile().map_err(|e| Error::Schema { line, message: e.to_string() })
}

pub fn to_line(p: &Profile) -> String {
    serde_json::to_string(&ProfileDoc::from(p)).expect("profile documents always serialize")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id1: String,
    pub id2: String,
    pub simsc: f64,
    pub rejsc: u32,
    pub cfm: bool,
    pub decision: String,
}

impl From<&SimilarityEdge> for EdgeDoc {
    fn from(e: &SimilarityEdge) -> Self {
        Self {
            id1: e.id1.to_string(),
            id2: e.id2.to_string(),
            simsc: e.simsc,
            rejsc: e.rejsc,
            cfm: e.cfm,
            decision: e.decision.as_str().to_string(),
        }
    }
}

impl EdgeDoc {
    pub fn into_edge(self) -> provlink_core::Result<SimilarityEdge> {
        let decision = Decision::parse(&self.decision)
            .ok_or_else(|| provlink_core::Error::MalformedQuery(format!("unknown decision {:?}", self.decision)))?;
        Ok(SimilarityEdge {
            id1: ProfileId::new(self.id1)?,
            id2: ProfileId::new(self.id2)?,
            simsc: self.simsc,
            rejsc: self.rejsc,
            cfm: self.cfm,
            decision,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClauseDoc {
    pub key: String,
    #[serde(default)]
    pub value: String,
    #[serde(default)]
    pub prov_constraints: Vec<ProvDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NestedQueryDoc {
    pub clauses: Vec<ClauseDoc>,
}

impl From<NestedQueryDoc> for NestedQuery {
    fn from(doc: NestedQueryDoc) -> Self {
        NestedQuery::new(
            doc.clauses
                .into_iter()
                .map(|c| NestedClause { prov_constraints: prov_pairs(&c.prov_constraints), key: c.key, value: c.value })
                .collect(),
        )
    }
}
