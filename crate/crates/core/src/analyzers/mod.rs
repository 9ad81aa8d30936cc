//! Text normalization and string similarity.

mod metaphone;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub use metaphone::{double_metaphone, PhoneticCode};

/// Lowercase maximal runs of letters and digits, in order, duplicates kept.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

fn ngrams(chars: &[char], n: usize) -> BTreeSet<&[char]> {
    chars.windows(n).collect()
}

/// Dice coefficient over the sets of character n-grams of `a` and `b`.
///
/// Strings shorter than `n` have no n-grams and compare by equality.
pub fn ngram_sim(a: &str, b: &str, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidN);
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.len() < n || b.len() < n {
        return Ok(if a == b { 1.0 } else { 0.0 });
    }
    let ga = ngrams(&a, n);
    let gb = ngrams(&b, n);
    let shared = ga.intersection(&gb).count();
    Ok(2.0 * shared as f64 / (ga.len() + gb.len()) as f64)
}

/// Levenshtein distance over chars.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = Vec::with_capacity(b.len() + 1);
    for (i, ca) in a.iter().enumerate() {
        cur.clear();
        cur.push(i + 1);
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur.push(sub.min(prev[j + 1] + 1).min(cur[j] + 1));
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - levenshtein / max(len)`; two empty strings are identical.
pub fn edit_sim(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

/// Name aliases, e.g. `richard -> {dick, rick}`. Lookups work in both directions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AliasDictionary {
    entries: BTreeMap<String, BTreeSet<String>>,
    reverse: BTreeMap<String, BTreeSet<String>>,
}

impl AliasDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, canonical: &str, alias: &str) {
        let canonical = canonical.trim().to_lowercase();
        let alias = alias.trim().to_lowercase();
        if canonical.is_empty() || alias.is_empty() || canonical == alias {
            return;
        }
        self.entries.entry(canonical.clone()).or_default().insert(alias.clone());
        self.reverse.entry(alias).or_default().insert(canonical);
    }

    /// Parses `canonical<TAB>alias1,alias2,...` lines; `#` starts a comment.
    /// Lines without a tab are ignored.
    pub fn parse(text: &str) -> Self {
        let mut dict = Self::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            let Some((canonical, aliases)) = line.split_once('\t') else {
                continue;
            };
            for alias in aliases.split(',') {
                dict.insert(canonical, alias);
            }
        }
        dict
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `word` first, then everything one dictionary step away from it.
    pub fn expand(&self, word: &str) -> Vec<String> {
        let mut out = alloc::vec![word.to_string()];
        let neighbours = self.entries.get(word).into_iter().chain(self.reverse.get(word));
        for w in neighbours.flatten() {
            if !out.contains(w) {
                out.push(w.clone());
            }
        }
        out
    }
}

/// Street-type abbreviations (`blvd -> boulevard`) and their inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreetTypeDictionary {
    abbrev_to_full: BTreeMap<String, String>,
    full_to_abbrev: BTreeMap<String, String>,
}

const DEFAULT_STREET_TYPES: &[(&str, &str)] = &[
    ("ave", "avenue"),
    ("blvd", "boulevard"),
    ("cct", "circuit"),
    ("cl", "close"),
    ("cres", "crescent"),
    ("ct", "court"),
    ("dr", "drive"),
    ("esp", "esplanade"),
    ("hwy", "highway"),
    ("ln", "lane"),
    ("pde", "parade"),
    ("pl", "place"),
    ("rd", "road"),
    ("sq", "square"),
    ("st", "street"),
    ("tce", "terrace"),
];

impl Default for StreetTypeDictionary {
    fn default() -> Self {
        let mut dict = Self::empty();
        for (abbrev, full) in DEFAULT_STREET_TYPES {
            dict.insert(abbrev, full);
        }
        dict
    }
}

impl StreetTypeDictionary {
    pub fn empty() -> Self {
        Self { abbrev_to_full: BTreeMap::new(), full_to_abbrev: BTreeMap::new() }
    }

    pub fn insert(&mut self, abbrev: &str, full: &str) {
        let abbrev = abbrev.trim().to_lowercase();
        let full = full.trim().to_lowercase();
        if abbrev.is_empty() || full.is_empty() {
            return;
        }
        self.full_to_abbrev.insert(full.clone(), abbrev.clone());
        self.abbrev_to_full.insert(abbrev, full);
    }

    /// Parses `abbrev<TAB>full` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        let mut dict = Self::empty();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            if let Some((abbrev, full)) = line.split_once('\t') {
                dict.insert(abbrev, full);
            }
        }
        dict
    }

    /// The other form of a street-type word, if it is one.
    pub fn counterpart(&self, word: &str) -> Option<&str> {
        let word = word.to_lowercase();
        self.abbrev_to_full
            .get(&word)
            .or_else(|| self.full_to_abbrev.get(&word))
            .map(String::as_str)
    }
}

/// Follows every street-type word with its other form; other words pass through.
pub fn normalize_address(words: &[String], dict: &StreetTypeDictionary) -> Vec<String> {
    let mut out = Vec::with_capacity(words.len());
    for w in words {
        out.push(w.clone());
        if let Some(other) = dict.counterpart(w) {
            out.push(other.to_string());
        }
    }
    out
}

/// Name alias expansion as a free function.
pub fn expand_aliases(word: &str, dict: &AliasDictionary) -> Vec<String> {
    dict.expand(word)
}

/// The dictionaries applied to every value before indexing and matching.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Analyzer {
    pub aliases: AliasDictionary,
    pub street_types: StreetTypeDictionary,
}

impl Analyzer {
    pub fn new(aliases: AliasDictionary, street_types: StreetTypeDictionary) -> Self {
        Self { aliases, street_types }
    }

    /// Tokenizes `text` and expands aliases and street types, dropping duplicates.
    pub fn words(&self, text: &str) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for token in tokenize(text) {
            for alias in self.aliases.expand(&token) {
                let pair = [alias];
                for w in normalize_address(&pair, &self.street_types) {
                    if !out.contains(&w) {
                        out.push(w);
                    }
                }
            }
        }
        out
    }
}
