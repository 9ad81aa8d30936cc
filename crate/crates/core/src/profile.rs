//! Entity profiles `<id, attributes, relations>` and the profiles graph.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::temporal;

/// Opaque profile identifier.
///
/// Non-empty and free of `-`, which the key-value similarity layouts use to
/// join two ids into one row key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProfileId(String);

impl ProfileId {
    pub fn new(value: impl Into<String>) -> Result<Self> {
        let value = value.into();
        if value.is_empty() || value.contains('-') {
            return Err(Error::InvalidId(value));
        }
        Ok(Self(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ProfileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<&str> for ProfileId {
    type Error = Error;

    fn try_from(value: &str) -> Result<Self> {
        Self::new(value)
    }
}

impl AsRef<str> for ProfileId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// One provenance key-value pair, e.g. `until: 1991`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProvPair {
    pub pkey: String,
    pub pvalue: String,
}

impl ProvPair {
    pub fn new(pkey: impl Into<String>, pvalue: impl Into<String>) -> Self {
        Self { pkey: pkey.into(), pvalue: pvalue.into() }
    }

    pub fn is_temporal(&self) -> bool {
        temporal::Bound::of_pkey(&self.pkey).is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AttributeObject {
    pub key: String,
    pub value: String,
    pub prov: Vec<ProvPair>,
}

impl AttributeObject {
    pub fn new(key: impl Into<String>, value: impl Into<String>) -> Self {
        Self { key: key.into(), value: value.into(), prov: Vec::new() }
    }

    pub fn with_prov(mut self, pkey: impl Into<String>, pvalue: impl Into<String>) -> Self {
        self.prov.push(ProvPair::new(pkey, pvalue));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationObject {
    pub key: String,
    pub target: ProfileId,
    pub prov: Vec<ProvPair>,
}

impl RelationObject {
    pub fn new(key: impl Into<String>, target: ProfileId) -> Self {
        Self { key: key.into(), target, prov: Vec::new() }
    }

    pub fn with_prov(mut self, pkey: impl Into<String>, pvalue: impl Into<String>) -> Self {
        self.prov.push(ProvPair::new(pkey, pvalue));
        self
    }
}

/// A profile: identifier plus ordered attribute- and relation-object lists.
///
/// Several objects may share a key (multiplicity). Byte-identical objects
/// are collapsed at construction; everything else keeps insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    id: ProfileId,
    attributes: Vec<AttributeObject>,
    relations: Vec<RelationObject>,
}

/// A value of an attribute or relation key, as returned by [`Profile::values_of`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValueRef<'a> {
    /// Attribute value, or the target id for relations.
    pub value: &'a str,
    pub prov: &'a [ProvPair],
    pub is_relation: bool,
}

fn check_prov(prov: &[ProvPair]) -> Result<()> {
    for pair in prov {
        if pair.pkey.is_empty() {
            return Err(Error::EmptyKey("provenance pair"));
        }
        if pair.is_temporal() && temporal::Date::parse(&pair.pvalue).is_none() {
            return Err(Error::InvalidProvenance {
                pkey: pair.pkey.clone(),
                pvalue: pair.pvalue.clone(),
            });
        }
    }
    Ok(())
}

fn dedup_in_order<T: PartialEq>(items: Vec<T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(items.len());
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

impl Profile {
    /// Builds a profile, validating every object and dropping exact duplicates.
    pub fn new(
        id: ProfileId,
        attributes: Vec<AttributeObject>,
        relations: Vec<RelationObject>,
    ) -> Result<Self> {
        for a in &attributes {
            if a.key.is_empty() {
                return Err(Error::EmptyKey("attribute object"));
            }
            if a.value.is_empty() {
                return Err(Error::EmptyValue(a.key.clone()));
            }
            check_prov(&a.prov)?;
        }
        for r in &relations {
            if r.key.is_empty() {
                return Err(Error::EmptyKey("relation object"));
            }
            check_prov(&r.prov)?;
        }
        Ok(Self {
            id,
            attributes: dedup_in_order(attributes),
            relations: dedup_in_order(relations),
        })
    }

    pub fn id(&self) -> &ProfileId {
        &self.id
    }

    pub fn attributes(&self) -> &[AttributeObject] {
        &self.attributes
    }

    pub fn relations(&self) -> &[RelationObject] {
        &self.relations
    }

    /// Node label: the first `type` attribute value, `"unknown"` if absent.
    pub fn label(&self) -> &str {
        self.entity_type().unwrap_or("unknown")
    }

    pub fn entity_type(&self) -> Option<&str> {
        self.attributes.iter().find(|a| a.key == "type").map(|a| a.value.as_str())
    }

    /// One relation-edge per relation object, in order. Targets may dangle.
    pub fn relation_edges(&self) -> Vec<RelationEdge> {
        self.relations
            .iter()
            .map(|r| RelationEdge {
                rel: r.key.clone(),
                source: self.id.clone(),
                target: r.target.clone(),
                prov: r.prov.clone(),
            })
            .collect()
    }

    /// All values of `key`, attributes first then relations, each in list order.
    pub fn values_of(&self, key: &str) -> Vec<ValueRef<'_>> {
        let attrs = self.attributes.iter().filter(|a| a.key == key).map(|a| ValueRef {
            value: &a.value,
            prov: &a.prov,
            is_relation: false,
        });
        let rels = self.relations.iter().filter(|r| r.key == key).map(|r| ValueRef {
            value: r.target.as_str(),
            prov: &r.prov,
            is_relation: true,
        });
        attrs.chain(rels).collect()
    }

    /// Distinct attribute and relation keys.
    pub fn keys(&self) -> BTreeSet<&str> {
        self.attributes
            .iter()
            .map(|a| a.key.as_str())
            .chain(self.relations.iter().map(|r| r.key.as_str()))
            .collect()
    }

    /// Copy of this profile under a different id.
    pub fn with_id(&self, id: ProfileId) -> Self {
        Self { id, attributes: self.attributes.clone(), relations: self.relations.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RelationEdge {
    pub rel: String,
    pub source: ProfileId,
    pub target: ProfileId,
    pub prov: Vec<ProvPair>,
}

/// Link state of a profile pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Decision {
    Pending,
    Match,
    Nonmatch,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Pending => "pending",
            Decision::Match => "match",
            Decision::Nonmatch => "nonmatch",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pending" => Some(Decision::Pending),
            "match" => Some(Decision::Match),
            "nonmatch" => Some(Decision::Nonmatch),
            _ => None,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Similarity-edge between two profiles, stored in canonical order `id1 < id2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityEdge {
    pub id1: ProfileId,
    pub id2: ProfileId,
    pub simsc: f64,
    pub rejsc: u32,
    /// Whether a user has confirmed the link state.
    pub cfm: bool,
    pub decision: Decision,
}

impl SimilarityEdge {
    /// Unconfirmed, pending edge for the pair `{a, b}` in canonical order.
    pub fn new(a: ProfileId, b: ProfileId, simsc: f64, rejsc: u32) -> Result<Self> {
        let (id1, id2) = canonical_pair(a, b)?;
        Ok(Self { id1, id2, simsc, rejsc, cfm: false, decision: Decision::Pending })
    }

    pub fn with_decision(mut self, decision: Decision) -> Self {
        self.decision = decision;
        self
    }

    pub fn is_canonical(&self) -> bool {
        self.id1 < self.id2
    }

    pub fn involves(&self, id: &ProfileId) -> bool {
        &self.id1 == id || &self.id2 == id
    }

    /// The endpoint that is not `id`.
    pub fn other(&self, id: &ProfileId) -> &ProfileId {
        if &self.id1 == id {
            &self.id2
        } else {
            &self.id1
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.id1 == self.id2 {
            return Err(Error::SameId(self.id1.clone()));
        }
        if !self.is_canonical() {
            return Err(Error::NonCanonicalPair(self.id1.clone(), self.id2.clone()));
        }
        if self.cfm && self.decision == Decision::Pending {
            return Err(Error::ConfirmedPending(self.id1.clone(), self.id2.clone()));
        }
        Ok(())
    }
}

/// Orders two distinct ids so the smaller comes first.
pub fn canonical_pair(a: ProfileId, b: ProfileId) -> Result<(ProfileId, ProfileId)> {
    match a.cmp(&b) {
        core::cmp::Ordering::Less => Ok((a, b)),
        core::cmp::Ordering::Greater => Ok((b, a)),
        core::cmp::Ordering::Equal => Err(Error::SameId(a)),
    }
}

/// The entity profiles graph: nodes carry attribute lists, relation-edges are
/// derived from relation objects, similarity-edges are held separately.
#[derive(Debug, Clone, Default)]
pub struct ProfilesGraph {
    nodes: BTreeMap<ProfileId, Profile>,
    similarity: BTreeMap<(ProfileId, ProfileId), SimilarityEdge>,
}

impl ProfilesGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces a node.
    pub fn insert(&mut self, profile: Profile) {
        self.nodes.insert(profile.id().clone(), profile);
    }

    pub fn node(&self, id: &ProfileId) -> Option<&Profile> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Profile> {
        self.nodes.values()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Union of relation-edges over all nodes.
    pub fn relation_edges(&self) -> Vec<RelationEdge> {
        self.nodes.values().flat_map(Profile::relation_edges).collect()
    }

    /// Relation-edges whose target is not a node of the graph.
    pub fn dangling_edges(&self) -> Vec<RelationEdge> {
        self.relation_edges()
            .into_iter()
            .filter(|e| !self.nodes.contains_key(&e.target))
            .collect()
    }

    pub fn set_similarity(&mut self, edge: SimilarityEdge) -> Result<()> {
        edge.validate()?;
        self.similarity.insert((edge.id1.clone(), edge.id2.clone()), edge);
        Ok(())
    }

    pub fn similarity(&self, a: &ProfileId, b: &ProfileId) -> Option<&SimilarityEdge> {
        let key = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        self.similarity.get(&key)
    }

    pub fn similarity_edges(&self) -> impl Iterator<Item = &SimilarityEdge> {
        self.similarity.values()
    }
}

impl fmt::Display for RelationEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.rel, self.source, self.target)?;
        if !self.prov.is_empty() {
            let parts: Vec<String> =
                self.prov.iter().map(|p| p.pkey.to_string() + ":" + &p.pvalue).collect();
            write!(f, "{{{}}}", parts.join(", "))?;
        }
        Ok(())
    }
}
