//! Pairwise similarity: word-level match, per-key match level `M`, the
//! information level `I`, and the profile scores `simsc` and `rejsc`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::analyzers::{double_metaphone, edit_sim, ngram_sim, Analyzer, PhoneticCode};
use crate::error::{Error, Result};
use crate::profile::{Profile, ProfileId, ProvPair};
use crate::temporal::{Date, Interval};

/// Key excluded from summaries and from `simsc`.
pub const TYPE_KEY: &str = "type";

/// Tunables for scoring, storage pruning and match prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchConfig {
    pub alpha: f64,
    pub beta: f64,
    pub ngram_n: usize,
    pub value_match_threshold: f64,
    /// Per-key overrides of `value_match_threshold`.
    pub key_thresholds: BTreeMap<String, f64>,
    pub phonetic_weight: f64,
    pub provenance_damping: f64,
    /// Level for a single-letter token against a word with the same initial.
    pub initial_weight: f64,
    /// Entity type → keys whose disagreement adds a rejection penalty.
    pub key_attributes: BTreeMap<String, Vec<String>>,
    pub tau_store: f64,
    pub tau_match: f64,
    pub rho_max: u32,
    pub candidates_k: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        let mut key_attributes = BTreeMap::new();
        key_attributes.insert("person".to_string(), vec!["bdate".to_string()]);
        key_attributes.insert("location".to_string(), vec!["post".to_string()]);
        Self {
            alpha: 0.1,
            beta: 60.0,
            ngram_n: 2,
            value_match_threshold: 0.7,
            key_thresholds: BTreeMap::new(),
            phonetic_weight: 0.9,
            provenance_damping: 0.8,
            initial_weight: 0.6,
            key_attributes,
            tau_store: 0.5,
            tau_match: 1.5,
            rho_max: 0,
            candidates_k: 50,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if self.alpha.is_nan() || self.alpha <= 0.0 || !self.beta.is_finite() {
            return bad("alpha must be positive and beta finite");
        }
        if self.ngram_n == 0 {
            return bad("ngram_n must be at least 1");
        }
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        let weights = [
            self.value_match_threshold,
            self.phonetic_weight,
            self.provenance_damping,
            self.initial_weight,
        ];
        if !weights.into_iter().chain(self.key_thresholds.values().copied()).all(unit) {
            return bad("weights and value thresholds must lie in [0, 1]");
        }
        if [self.tau_store, self.tau_match].iter().any(|t| t.is_nan() || *t < 0.0) {
            return bad("thresholds must be non-negative");
        }
        if self.candidates_k == 0 {
            return bad("candidates_k must be at least 1");
        }
        Ok(())
    }

    pub fn threshold_for(&self, key: &str) -> f64 {
        self.key_thresholds.get(key).copied().unwrap_or(self.value_match_threshold)
    }

    pub fn inf(&self, m: u64) -> f64 {
        inf(m, self.alpha, self.beta)
    }
}

/// Rarity weight `1 / (1 + exp(alpha * m - beta))` of a word shared by `m` profiles.
pub fn inf(m: u64, alpha: f64, beta: f64) -> f64 {
    1.0 / (1.0 + libm::exp(alpha * m as f64 - beta))
}

/// What scoring needs from the indexed corpus.
pub trait Corpus {
    fn analyzer(&self) -> &Analyzer;

    /// Number of profiles whose summary contains `word`.
    fn word_count(&self, word: &str) -> u64;

    /// Summary words of an indexed profile.
    fn bag(&self, id: &ProfileId) -> Option<&BTreeSet<String>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub w1: String,
    pub w2: String,
    pub level: f64,
}

/// Result of comparing the values two profiles hold for one key.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KeyMatch {
    pub score: f64,
    pub pairs: Vec<MatchedPair>,
}

#[derive(Debug, Clone)]
struct Word {
    text: String,
    code: PhoneticCode,
}

impl Word {
    fn new(text: String) -> Self {
        let code = double_metaphone(&text);
        Self { text, code }
    }
}

/// One value made ready for comparison.
#[derive(Debug, Clone)]
pub struct PreparedValue {
    words: Vec<Word>,
    date: Option<Date>,
    interval: Option<Interval>,
}

/// A profile's values grouped by key and pre-analyzed, so each profile is
/// tokenized and encoded once however many pairs it takes part in.
#[derive(Debug, Clone)]
pub struct Features {
    pub id: ProfileId,
    pub entity_type: Option<String>,
    keys: BTreeMap<String, Vec<PreparedValue>>,
}

impl Features {
    pub fn of<C: Corpus + ?Sized>(p: &Profile, corpus: &C) -> Self {
        let mut keys: BTreeMap<String, Vec<PreparedValue>> = BTreeMap::new();
        for key in p.keys() {
            let values = p
                .values_of(key)
                .into_iter()
                .map(|v| {
                    let texts = if v.is_relation {
                        relation_words(v.value, corpus)
                    } else {
                        corpus.analyzer().words(v.value)
                    };
                    let date = if v.is_relation {
                        None
                    } else {
                        Date::parse(v.value.trim()).filter(Date::is_full)
                    };
                    PreparedValue {
                        words: texts.into_iter().map(Word::new).collect(),
                        date,
                        interval: Interval::from_prov(v.prov),
                    }
                })
                .collect();
            keys.insert(key.to_string(), values);
        }
        Self { id: p.id().clone(), entity_type: p.entity_type().map(str::to_string), keys }
    }
}

/// Words standing for a relation target: its summary, or its id when the
/// target is not indexed.
fn relation_words<C: Corpus + ?Sized>(target: &str, corpus: &C) -> Vec<String> {
    let bag = ProfileId::new(target).ok().and_then(|id| corpus.bag(&id));
    match bag {
        Some(bag) if !bag.is_empty() => bag.iter().cloned().collect(),
        _ => crate::analyzers::tokenize(target),
    }
}

/// Match level of two normalized words.
pub fn word_level(w1: &str, w2: &str, cfg: &MatchConfig, threshold: f64) -> f64 {
    word_level_coded(
        w1,
        &double_metaphone(w1),
        w2,
        &double_metaphone(w2),
        cfg,
        threshold,
    )
}

fn word_level_coded(
    w1: &str,
    c1: &PhoneticCode,
    w2: &str,
    c2: &PhoneticCode,
    cfg: &MatchConfig,
    threshold: f64,
) -> f64 {
    if w1 == w2 {
        return 1.0;
    }
    if c1.intersects(c2) {
        return cfg.phonetic_weight;
    }
    let initial = |a: &str, b: &str| a.chars().count() == 1 && b.starts_with(a);
    if initial(w1, w2) || initial(w2, w1) {
        return cfg.initial_weight;
    }
    let n = cfg.ngram_n.max(1);
    let gram = ngram_sim(w1, w2, n).unwrap_or(0.0);
    if gram >= threshold {
        edit_sim(w1, w2)
    } else {
        0.0
    }
}

/// 1.0 unless both sides carry temporal provenance with disjoint validity,
/// in which case the configured damping factor.
pub fn provenance_factor(prov1: &[ProvPair], prov2: &[ProvPair], cfg: &MatchConfig) -> f64 {
    interval_factor(Interval::from_prov(prov1), Interval::from_prov(prov2), cfg)
}

fn interval_factor(a: Option<Interval>, b: Option<Interval>, cfg: &MatchConfig) -> f64 {
    match (a, b) {
        (Some(a), Some(b)) if !a.overlaps(&b) => cfg.provenance_damping,
        _ => 1.0,
    }
}

fn value_match(
    v1: &PreparedValue,
    v2: &PreparedValue,
    cfg: &MatchConfig,
    threshold: f64,
    pairs: &mut Vec<MatchedPair>,
) -> f64 {
    if let (Some(d1), Some(d2)) = (v1.date, v2.date) {
        if d1 != d2 {
            return 0.0;
        }
        for w in &v1.words {
            if v2.words.iter().any(|x| x.text == w.text) {
                pairs.push(MatchedPair { w1: w.text.clone(), w2: w.text.clone(), level: 1.0 });
            }
        }
        return interval_factor(v1.interval, v2.interval, cfg);
    }
    let mut best: f64 = 0.0;
    for a in &v1.words {
        for b in &v2.words {
            let level = word_level_coded(&a.text, &a.code, &b.text, &b.code, cfg, threshold);
            if level >= threshold && level > 0.0 {
                pairs.push(MatchedPair { w1: a.text.clone(), w2: b.text.clone(), level });
                best = best.max(level);
            }
        }
    }
    if best > 0.0 {
        best * interval_factor(v1.interval, v2.interval, cfg)
    } else {
        0.0
    }
}

fn match_prepared(key: &str, vals1: &[PreparedValue], vals2: &[PreparedValue], cfg: &MatchConfig) -> KeyMatch {
    let threshold = cfg.threshold_for(key);
    let mut out = KeyMatch::default();
    for v1 in vals1 {
        for v2 in vals2 {
            let score = value_match(v1, v2, cfg, threshold, &mut out.pairs);
            out.score = out.score.max(score);
        }
    }
    out
}

/// `M`: best provenance-damped level over all value pairs of `key`, with every
/// word pair at or above the key's threshold.
pub fn match_level(key: &str, f1: &Features, f2: &Features, cfg: &MatchConfig) -> KeyMatch {
    match (f1.keys.get(key), f2.keys.get(key)) {
        (Some(a), Some(b)) => match_prepared(key, a, b, cfg),
        _ => KeyMatch::default(),
    }
}

/// `I`: highest mean rarity over the retained word pairs.
pub fn info_level<C: Corpus + ?Sized>(pairs: &[MatchedPair], corpus: &C, cfg: &MatchConfig) -> f64 {
    pairs
        .iter()
        .map(|p| (cfg.inf(corpus.word_count(&p.w1)) + cfg.inf(corpus.word_count(&p.w2))) / 2.0)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScore {
    pub simsc: f64,
    pub rejsc: u32,
}

/// Sum of `M * I` over the keys both profiles hold, `type` excluded.
pub fn simsc_features<C: Corpus + ?Sized>(f1: &Features, f2: &Features, corpus: &C, cfg: &MatchConfig) -> Result<f64> {
    if f1.id == f2.id {
        return Err(Error::SameId(f1.id.clone()));
    }
    let mut total = 0.0;
    for (key, vals1) in &f1.keys {
        if key == TYPE_KEY {
            continue;
        }
        let Some(vals2) = f2.keys.get(key) else { continue };
        let m = match_prepared(key, vals1, vals2, cfg);
        if m.score > 0.0 {
            total += m.score * info_level(&m.pairs, corpus, cfg);
        }
    }
    Ok(total)
}

/// Number of configured key attributes on which two same-type profiles
/// disagree.
pub fn rejsc_features(f1: &Features, f2: &Features, cfg: &MatchConfig) -> u32 {
    let (Some(t1), Some(t2)) = (&f1.entity_type, &f2.entity_type) else { return 0 };
    if t1 != t2 {
        return 0;
    }
    let Some(keys) = cfg.key_attributes.get(t1) else { return 0 };
    let mut penalty = 0;
    for key in keys {
        if let (Some(a), Some(b)) = (f1.keys.get(key), f2.keys.get(key)) {
            if match_prepared(key, a, b, cfg).score < cfg.threshold_for(key) {
                penalty += 1;
            }
        }
    }
    penalty
}

pub fn score_features<C: Corpus + ?Sized>(f1: &Features, f2: &Features, corpus: &C, cfg: &MatchConfig) -> Result<PairScore> {
    Ok(PairScore { simsc: simsc_features(f1, f2, corpus, cfg)?, rejsc: rejsc_features(f1, f2, cfg) })
}

pub fn simsc<C: Corpus + ?Sized>(p1: &Profile, p2: &Profile, corpus: &C, cfg: &MatchConfig) -> Result<f64> {
    simsc_features(&Features::of(p1, corpus), &Features::of(p2, corpus), corpus, cfg)
}

pub fn rejsc<C: Corpus + ?Sized>(p1: &Profile, p2: &Profile, corpus: &C, cfg: &MatchConfig) -> u32 {
    rejsc_features(&Features::of(p1, corpus), &Features::of(p2, corpus), cfg)
}

#[cfg(test)]
mod tests;
