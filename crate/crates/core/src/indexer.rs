//! Keyword/blocking index over profile summaries, corpus word statistics,
//! and the nested index that keeps each object's value and provenance
//! together.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::analyzers::{double_metaphone, Analyzer};
use crate::error::{Error, Result};
use crate::profile::{Profile, ProfileId, ProvPair};
use crate::scoring::{Corpus, MatchConfig, TYPE_KEY};
use crate::temporal::{Bound, Date, Interval};

/// Weight of a phonetic-only hit relative to an exact word hit.
pub const PHONETIC_DISCOUNT: f64 = 0.7;

/// Deduplicated, normalized words describing a profile.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SummaryBag {
    pub words: BTreeSet<String>,
}

impl SummaryBag {
    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }
}

/// `m(w)` for every word: how many indexed profiles have it in their summary.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WordStats {
    counts: BTreeMap<String, u64>,
    total_profiles: u64,
}

impl WordStats {
    /// Recounts from scratch.
    pub fn from_bags<'a>(bags: impl IntoIterator<Item = &'a SummaryBag>) -> Self {
        let mut stats = WordStats::default();
        for bag in bags {
            stats.add(bag);
        }
        stats
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn total_profiles(&self) -> u64 {
        self.total_profiles
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    fn add(&mut self, bag: &SummaryBag) {
        self.total_profiles += 1;
        for w in &bag.words {
            *self.counts.entry(w.clone()).or_insert(0) += 1;
        }
    }

    fn remove(&mut self, bag: &SummaryBag) {
        self.total_profiles -= 1;
        for w in &bag.words {
            if let Some(c) = self.counts.get_mut(w) {
                *c -= 1;
                if *c == 0 {
                    self.counts.remove(w);
                }
            }
        }
    }
}

/// One conjunct of a [`NestedQuery`]; all of it must hold within a single
/// attribute or relation object.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NestedClause {
    pub key: String,
    pub value: String,
    pub prov_constraints: Vec<ProvPair>,
}

impl NestedClause {
    pub fn new(key: impl Into<String>, value: impl Into<String>) -> Self {
        Self { key: key.into(), value: value.into(), prov_constraints: Vec::new() }
    }

    pub fn with_prov(mut self, pkey: impl Into<String>, pvalue: impl Into<String>) -> Self {
        self.prov_constraints.push(ProvPair::new(pkey, pvalue));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NestedQuery {
    pub clauses: Vec<NestedClause>,
}

impl NestedQuery {
    pub fn new(clauses: Vec<NestedClause>) -> Self {
        Self { clauses }
    }
}

/// An indexed attribute or relation object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedObject {
    pub key: String,
    pub words: BTreeSet<String>,
    pub prov: Vec<ProvPair>,
}

/// Everything the index keeps about one profile; enough to rebuild the
/// postings without the knowledge base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    pub id: ProfileId,
    pub bag: SummaryBag,
    pub objects: Vec<NestedObject>,
    pub targets: BTreeSet<ProfileId>,
}

fn attribute_words(p: &Profile, analyzer: &Analyzer, out: &mut BTreeSet<String>) {
    for a in p.attributes().iter().filter(|a| a.key != TYPE_KEY) {
        out.extend(analyzer.words(&a.value));
    }
}

/// Own attribute values plus, for relation targets of a different type, the
/// target's attribute values. `type` values and provenance never contribute.
pub fn summarize<R>(p: &Profile, analyzer: &Analyzer, resolve: R) -> SummaryBag
where
    R: Fn(&ProfileId) -> Option<Profile>,
{
    let mut words = BTreeSet::new();
    attribute_words(p, analyzer, &mut words);
    let targets: BTreeSet<&ProfileId> = p.relations().iter().map(|r| &r.target).collect();
    for target in targets {
        if target == p.id() {
            continue;
        }
        if let Some(t) = resolve(target) {
            if t.entity_type() != p.entity_type() {
                attribute_words(&t, analyzer, &mut words);
            }
        }
    }
    SummaryBag { words }
}

fn nested_objects<R>(p: &Profile, analyzer: &Analyzer, resolve: &R) -> Vec<NestedObject>
where
    R: Fn(&ProfileId) -> Option<Profile>,
{
    let mut out = Vec::new();
    for a in p.attributes() {
        out.push(NestedObject {
            key: a.key.clone(),
            words: analyzer.words(&a.value).into_iter().collect(),
            prov: a.prov.clone(),
        });
    }
    for r in p.relations() {
        let mut words: BTreeSet<String> = BTreeSet::new();
        words.insert(r.target.as_str().to_lowercase());
        if let Some(t) = resolve(&r.target) {
            attribute_words(&t, analyzer, &mut words);
        }
        out.push(NestedObject { key: r.key.clone(), words, prov: r.prov.clone() });
    }
    out
}

enum Constraint<'a> {
    /// The object must be valid at some point of this span.
    At(Interval),
    Exact(&'a str, String),
}

fn compile(clause: &NestedClause) -> Result<Vec<Constraint<'_>>> {
    if clause.key.is_empty() {
        return Err(Error::MalformedQuery("clause with empty key".into()));
    }
    clause
        .prov_constraints
        .iter()
        .map(|c| {
            if c.pkey.is_empty() {
                return Err(Error::MalformedQuery("provenance constraint with empty key".into()));
            }
            if Bound::of_pkey(&c.pkey).is_some() {
                let date = Date::parse(c.pvalue.trim()).ok_or_else(|| {
                    Error::MalformedQuery(format!("{}={:?} is not a calendar date", c.pkey, c.pvalue))
                })?;
                Ok(Constraint::At(Interval::span(date)))
            } else {
                Ok(Constraint::Exact(&c.pkey, c.pvalue.to_lowercase()))
            }
        })
        .collect()
}

fn object_satisfies(obj: &NestedObject, words: &[String], constraints: &[Constraint<'_>]) -> bool {
    if !words.iter().all(|w| obj.words.contains(w)) {
        return false;
    }
    let validity = Interval::from_prov(&obj.prov);
    constraints.iter().all(|c| match c {
        Constraint::At(span) => validity.is_some_and(|v| v.overlaps(span)),
        Constraint::Exact(pkey, pvalue) => obj
            .prov
            .iter()
            .any(|p| p.pkey == *pkey && p.pvalue.to_lowercase() == *pvalue),
    })
}

/// In-memory keyword, phonetic and nested indexes.
#[derive(Debug, Clone)]
pub struct Index {
    analyzer: Analyzer,
    alpha: f64,
    beta: f64,
    entries: BTreeMap<ProfileId, IndexEntry>,
    postings: BTreeMap<String, BTreeSet<ProfileId>>,
    phonetic: BTreeMap<String, BTreeSet<String>>,
    by_key: BTreeMap<String, BTreeSet<ProfileId>>,
    inbound: BTreeMap<ProfileId, BTreeSet<ProfileId>>,
    stats: WordStats,
}

impl Index {
    pub fn new(analyzer: Analyzer, cfg: &MatchConfig) -> Self {
        Self {
            analyzer,
            alpha: cfg.alpha,
            beta: cfg.beta,
            entries: BTreeMap::new(),
            postings: BTreeMap::new(),
            phonetic: BTreeMap::new(),
            by_key: BTreeMap::new(),
            inbound: BTreeMap::new(),
            stats: WordStats::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: &ProfileId) -> bool {
        self.entries.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &ProfileId> {
        self.entries.keys()
    }

    pub fn stats(&self) -> &WordStats {
        &self.stats
    }

    pub fn summary(&self, id: &ProfileId) -> Option<&SummaryBag> {
        self.entries.get(id).map(|e| &e.bag)
    }

    pub fn entry(&self, id: &ProfileId) -> Option<&IndexEntry> {
        self.entries.get(id)
    }

    pub fn entries(&self) -> impl Iterator<Item = &IndexEntry> {
        self.entries.values()
    }

    /// Profiles with a relation pointing at `id`, whether or not `id` is indexed.
    pub fn sources_of(&self, id: &ProfileId) -> Vec<ProfileId> {
        self.inbound.get(id).map(|s| s.iter().cloned().collect()).unwrap_or_default()
    }

    /// Indexes or re-indexes `p`, then re-indexes the profiles whose
    /// relations point at it, since their summaries embed its values.
    /// `resolve` must already see the current version of every profile.
    pub fn index_profile<R>(&mut self, p: &Profile, resolve: R)
    where
        R: Fn(&ProfileId) -> Option<Profile>,
    {
        self.index_one(p, &resolve);
        for source in self.sources_of(p.id()) {
            if &source == p.id() {
                continue;
            }
            if let Some(sp) = resolve(&source) {
                self.index_one(&sp, &resolve);
            }
        }
    }

    /// Drops `id` and refreshes the profiles that pointed at it.
    pub fn remove_profile<R>(&mut self, id: &ProfileId, resolve: R) -> bool
    where
        R: Fn(&ProfileId) -> Option<Profile>,
    {
        if self.unindex(id).is_none() {
            return false;
        }
        for source in self.sources_of(id) {
            if let Some(sp) = resolve(&source) {
                self.index_one(&sp, &resolve);
            }
        }
        true
    }

    /// Indexes a whole corpus without the per-profile refresh of sources.
    pub fn rebuild<'a, I, R>(&mut self, profiles: I, resolve: R)
    where
        I: IntoIterator<Item = &'a Profile>,
        R: Fn(&ProfileId) -> Option<Profile>,
    {
        for p in profiles {
            self.index_one(p, &resolve);
        }
    }

    /// Restores previously exported entries.
    pub fn restore(&mut self, entries: impl IntoIterator<Item = IndexEntry>) {
        for entry in entries {
            self.unindex(&entry.id);
            self.insert_entry(entry);
        }
    }

    fn index_one<R>(&mut self, p: &Profile, resolve: &R)
    where
        R: Fn(&ProfileId) -> Option<Profile>,
    {
        self.unindex(p.id());
        let entry = IndexEntry {
            id: p.id().clone(),
            bag: summarize(p, &self.analyzer, resolve),
            objects: nested_objects(p, &self.analyzer, resolve),
            targets: p.relations().iter().map(|r| r.target.clone()).collect(),
        };
        self.insert_entry(entry);
    }

    fn insert_entry(&mut self, entry: IndexEntry) {
        let id = entry.id.clone();
        for w in &entry.bag.words {
            let posting = self.postings.entry(w.clone()).or_default();
            if posting.is_empty() {
                for code in double_metaphone(w).codes() {
                    self.phonetic.entry(code.to_string()).or_default().insert(w.clone());
                }
            }
            posting.insert(id.clone());
        }
        for obj in &entry.objects {
            self.by_key.entry(obj.key.clone()).or_default().insert(id.clone());
        }
        for t in &entry.targets {
            self.inbound.entry(t.clone()).or_default().insert(id.clone());
        }
        self.stats.add(&entry.bag);
        self.entries.insert(id, entry);
    }

    fn unindex(&mut self, id: &ProfileId) -> Option<IndexEntry> {
        let entry = self.entries.remove(id)?;
        for w in &entry.bag.words {
            let Some(posting) = self.postings.get_mut(w) else { continue };
            posting.remove(id);
            if posting.is_empty() {
                self.postings.remove(w);
                for code in double_metaphone(w).codes() {
                    if let Some(words) = self.phonetic.get_mut(code) {
                        words.remove(w);
                        if words.is_empty() {
                            self.phonetic.remove(code);
                        }
                    }
                }
            }
        }
        for obj in &entry.objects {
            if let Some(ids) = self.by_key.get_mut(&obj.key) {
                ids.remove(id);
                if ids.is_empty() {
                    self.by_key.remove(&obj.key);
                }
            }
        }
        for t in &entry.targets {
            if let Some(sources) = self.inbound.get_mut(t) {
                sources.remove(id);
                if sources.is_empty() {
                    self.inbound.remove(t);
                }
            }
        }
        self.stats.remove(&entry.bag);
        Some(entry)
    }

    pub fn word_count(&self, word: &str) -> u64 {
        self.stats.count(word)
    }

    fn inf(&self, word: &str) -> f64 {
        crate::scoring::inf(self.word_count(word), self.alpha, self.beta)
    }

    /// Ranks profiles by the summed rarity of the query words they contain.
    /// A word absent from a profile still scores through a phonetically
    /// equal word, discounted by [`PHONETIC_DISCOUNT`].
    pub fn keyword_search(&self, q: &str, k: usize) -> Vec<(ProfileId, f64)> {
        let words: BTreeSet<String> = self.analyzer.words(q).into_iter().collect();
        self.rank(&words, k, None)
    }

    /// Blocking: the top `k` profiles for a query made of `id`'s summary.
    pub fn candidates(&self, id: &ProfileId, k: usize) -> Vec<ProfileId> {
        let Some(entry) = self.entries.get(id) else { return Vec::new() };
        self.rank(&entry.bag.words, k, Some(id)).into_iter().map(|(id, _)| id).collect()
    }

    fn rank(&self, words: &BTreeSet<String>, k: usize, exclude: Option<&ProfileId>) -> Vec<(ProfileId, f64)> {
        let mut scores: BTreeMap<&ProfileId, f64> = BTreeMap::new();
        for w in words {
            let exact = self.postings.get(w);
            if let Some(ids) = exact {
                let weight = self.inf(w);
                for id in ids {
                    *scores.entry(id).or_insert(0.0) += weight;
                }
            }
            let mut sounds_like: BTreeMap<&ProfileId, f64> = BTreeMap::new();
            for code in double_metaphone(w).codes() {
                let Some(similar) = self.phonetic.get(code) else { continue };
                for other in similar.iter().filter(|o| *o != w) {
                    let weight = PHONETIC_DISCOUNT * self.inf(other);
                    for id in &self.postings[other] {
                        if exact.is_some_and(|e| e.contains(id)) {
                            continue;
                        }
                        let best = sounds_like.entry(id).or_insert(0.0);
                        *best = best.max(weight);
                    }
                }
            }
            for (id, weight) in sounds_like {
                *scores.entry(id).or_insert(0.0) += weight;
            }
        }
        let mut ranked: Vec<(ProfileId, f64)> = scores
            .into_iter()
            .filter(|(id, _)| Some(*id) != exclude)
            .map(|(id, s)| (id.clone(), s))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(k);
        ranked
    }

    /// Profiles satisfying every clause, each within one object.
    ///
    /// A clause's value words must all occur in the object. A temporal
    /// constraint (`from`/`since`/`to`/`until`) names a time: the object's
    /// validity interval must reach into that year, month or day, and
    /// objects without temporal provenance never qualify. Any other
    /// constraint needs the same provenance pair on the object.
    pub fn nested_search(&self, q: &NestedQuery) -> Result<Vec<ProfileId>> {
        if q.clauses.is_empty() {
            return Err(Error::MalformedQuery("query has no clauses".into()));
        }
        let compiled = q
            .clauses
            .iter()
            .map(|c| Ok((c, self.analyzer.words(&c.value), compile(c)?)))
            .collect::<Result<Vec<_>>>()?;

        let mut hits: Option<BTreeSet<&ProfileId>> = None;
        for (clause, words, constraints) in &compiled {
            let pool = self.by_key.get(&clause.key).into_iter().flatten();
            let matching: BTreeSet<&ProfileId> = pool
                .filter(|id| hits.as_ref().is_none_or(|h| h.contains(id)))
                .filter(|id| {
                    self.entries[*id]
                        .objects
                        .iter()
                        .filter(|o| o.key == clause.key)
                        .any(|o| object_satisfies(o, words, constraints))
                })
                .collect();
            hits = Some(matching);
        }
        Ok(hits.unwrap_or_default().into_iter().cloned().collect())
    }
}

impl Corpus for Index {
    fn analyzer(&self) -> &Analyzer {
        &self.analyzer
    }

    fn word_count(&self, word: &str) -> u64 {
        self.stats.count(word)
    }

    fn bag(&self, id: &ProfileId) -> Option<&BTreeSet<String>> {
        self.entries.get(id).map(|e| &e.bag.words)
    }
}
