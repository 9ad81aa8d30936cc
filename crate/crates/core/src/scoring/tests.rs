use alloc::format;

use proptest::prelude::*;

use super::*;
use crate::analyzers::{AliasDictionary, StreetTypeDictionary};
use crate::indexer::Index;
use crate::profile::fixtures::{id, p1, p2, p3, p4, sample};
use crate::profile::{AttributeObject, RelationObject};

fn index_with(analyzer: Analyzer, profiles: &[Profile]) -> Index {
    let mut index = Index::new(analyzer, &MatchConfig::default());
    index.rebuild(profiles, |t| profiles.iter().find(|p| p.id() == t).cloned());
    index
}

fn index_of(profiles: &[Profile]) -> Index {
    index_with(Analyzer::default(), profiles)
}

fn person(n: &str, attrs: &[(&str, &str)]) -> Profile {
    let mut all = vec![AttributeObject::new("type", "person")];
    all.extend(attrs.iter().map(|(k, v)| AttributeObject::new(*k, *v)));
    Profile::new(id(n), all, vec![]).unwrap()
}

#[test]
fn inf_examples() {
    let cfg = MatchConfig::default();
    assert_eq!(cfg.inf(600), 0.5);
    assert!((cfg.inf(0) - 1.0).abs() < 1e-12);
    let direct = 1.0 / (1.0 + 10f64.exp());
    assert!((cfg.inf(700) - direct).abs() < 1e-18);
    assert!((cfg.inf(700) - 4.54e-5).abs() < 1e-7);
}

#[test]
fn inf_is_strictly_decreasing_near_midpoint() {
    // Below m = 300 neighbouring values round to the same f64 near 1.0.
    let cfg = MatchConfig::default();
    for m in 300..1000 {
        assert!(cfg.inf(m) > cfg.inf(m + 1), "m={m}");
        assert!(cfg.inf(m) > 0.0 && cfg.inf(m) < 1.0);
    }
}

#[test]
fn config_validation() {
    assert!(MatchConfig::default().validate().is_ok());
    let bad = [
        MatchConfig { alpha: 0.0, ..Default::default() },
        MatchConfig { phonetic_weight: 1.5, ..Default::default() },
        MatchConfig { tau_store: -1.0, ..Default::default() },
        MatchConfig { ngram_n: 0, ..Default::default() },
    ];
    for cfg in bad {
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }
}

#[test]
fn word_level_examples() {
    let cfg = MatchConfig::default();
    assert_eq!(word_level("john", "john", &cfg, 0.7), 1.0);
    assert_eq!(word_level("john", "jon", &cfg, 0.7), 0.9);
    assert!((word_level("peter", "pete", &cfg, 0.7) - 0.8).abs() < 1e-12);
    assert_eq!(word_level("green", "white", &cfg, 0.7), 0.0);
    assert_eq!(word_level("j", "john", &cfg, 0.7), 0.6);
}

#[test]
fn match_level_examples() {
    let cfg = MatchConfig::default();
    let corpus = [person("A", &[("name", "Peter")]), person("B", &[("name", "Pete")])];
    let index = index_of(&corpus);
    let (fa, fb) = (Features::of(&corpus[0], &index), Features::of(&corpus[1], &index));
    let m = match_level("name", &fa, &fb, &cfg);
    assert!((m.score - 0.8).abs() < 1e-12);
    assert_eq!(m.pairs.len(), 1);
    assert_eq!((m.pairs[0].w1.as_str(), m.pairs[0].w2.as_str()), ("peter", "pete"));

    let corpus = [person("A", &[("name", "Richard")]), person("B", &[("name", "Dick")])];
    let analyzer = Analyzer::new(AliasDictionary::parse("richard\tdick,rick\n"), StreetTypeDictionary::default());
    let index = index_with(analyzer, &corpus);
    let (fa, fb) = (Features::of(&corpus[0], &index), Features::of(&corpus[1], &index));
    assert!(match_level("name", &fa, &fb, &cfg).score >= 0.9);
}

#[test]
fn provenance_factor_examples() {
    let cfg = MatchConfig::default();
    let pv = |pairs: &[(&str, &str)]| pairs.iter().map(|(k, v)| ProvPair::new(*k, *v)).collect::<Vec<_>>();
    assert_eq!(provenance_factor(&[], &pv(&[("from", "1989")]), &cfg), 1.0);
    assert_eq!(provenance_factor(&pv(&[("until", "1991")]), &pv(&[("since", "2005")]), &cfg), 0.8);
    assert_eq!(
        provenance_factor(&pv(&[("from", "1989"), ("to", "1995")]), &pv(&[("from", "1990"), ("to", "2000")]), &cfg),
        1.0
    );
}

#[test]
fn info_level_examples() {
    let cfg = MatchConfig::default();
    let index = index_of(&[]);
    assert_eq!(info_level(&[], &index, &cfg), 0.0);

    let mk = |i: usize, v: &str| person(&format!("Q{i:04}"), &[("name", v)]);
    let corpus: Vec<Profile> = (0..600).map(|i| mk(i, "smith")).collect();
    let index = index_of(&corpus);
    let pair = MatchedPair { w1: "smith".into(), w2: "smith".into(), level: 1.0 };
    assert_eq!(info_level(&[pair], &index, &cfg), 0.5);

    let mut corpus: Vec<Profile> = (0..3).map(|i| mk(i, "john smith")).collect();
    corpus.push(mk(10, "jones smiths"));
    let index = index_of(&corpus);
    let pairs = [
        MatchedPair { w1: "john".into(), w2: "jones".into(), level: 0.9 },
        MatchedPair { w1: "smith".into(), w2: "smiths".into(), level: 0.8 },
    ];
    let expected = ((cfg.inf(3) + cfg.inf(1)) / 2.0).max((cfg.inf(3) + cfg.inf(1)) / 2.0);
    assert_eq!(info_level(&pairs, &index, &cfg), expected);
}

#[test]
fn p1_p2_name_term() {
    let cfg = MatchConfig::default();
    let corpus = sample();
    let index = index_of(&corpus);
    let (f1, f2) = (Features::of(&p1(), &index), Features::of(&p2(), &index));
    let name = match_level("name", &f1, &f2, &cfg);
    assert_eq!(name.score, 1.0);
    assert_eq!(info_level(&name.pairs, &index, &cfg), cfg.inf(2));
    assert!(simsc(&p1(), &p2(), &index, &cfg).unwrap() >= cfg.inf(2));
}

#[test]
fn simsc_errors_and_zero_cases() {
    let cfg = MatchConfig::default();
    let corpus = sample();
    let index = index_of(&corpus);
    assert!(matches!(simsc(&p1(), &p1(), &index, &cfg), Err(Error::SameId(_))));
    let a = person("A", &[("name", "Green")]);
    let b = person("B", &[("name", "White")]);
    assert_eq!(simsc(&a, &b, &index, &cfg).unwrap(), 0.0);
    // Only "type" shared: excluded.
    let c = person("C", &[("hair", "red")]);
    assert_eq!(simsc(&a, &c, &index, &cfg).unwrap(), 0.0);
    let copy = p1().with_id(id("P9"));
    assert!(simsc(&p1(), &copy, &index, &cfg).unwrap() > 0.0);
}

#[test]
fn rejsc_examples() {
    let cfg = MatchConfig::default();
    let index = index_of(&[]);
    let a = person("A", &[("name", "John"), ("bdate", "1980-12-12")]);
    let b = person("B", &[("name", "John"), ("bdate", "1990-01-01")]);
    let c = person("C", &[("name", "Jon"), ("bdate", "1980.12.12")]);
    let d = person("D", &[("name", "John"), ("bdate", "1980-12-13")]);
    assert_eq!(rejsc(&a, &b, &index, &cfg), 1);
    assert_eq!(rejsc(&a, &c, &index, &cfg), 0);
    assert_eq!(rejsc(&a, &d, &index, &cfg), 1);
    assert_eq!(rejsc(&p3(), &p4(), &index, &cfg), 1);
    // Differing types never penalize.
    assert_eq!(rejsc(&p1(), &p3(), &index, &cfg), 0);
}

#[test]
fn relation_values_compare_target_summaries() {
    let cfg = MatchConfig::default();
    let corpus = sample();
    let index = index_of(&corpus);
    let (f1, f2) = (Features::of(&p1(), &index), Features::of(&p2(), &index));
    assert_eq!(match_level("lives_at", &f1, &f2, &cfg).score, 1.0);
    // A dangling target falls back to its id.
    let a = Profile::new(id("A"), vec![], vec![RelationObject::new("knows", id("Zed"))]).unwrap();
    let b = Profile::new(id("B"), vec![], vec![RelationObject::new("knows", id("Zed"))]).unwrap();
    assert!(simsc(&a, &b, &index, &cfg).unwrap() > 0.99);
}

/// Independent evaluation of simsc by enumerating every word pair of every
/// value pair of every shared key.
fn oracle_simsc(p: &Profile, q: &Profile, index: &Index, cfg: &MatchConfig) -> f64 {
    let words_of = |v: &crate::profile::ValueRef<'_>| -> Vec<String> {
        if v.is_relation {
            match index.bag(&id(v.value)) {
                Some(b) if !b.is_empty() => b.iter().cloned().collect(),
                _ => crate::analyzers::tokenize(v.value),
            }
        } else {
            index.analyzer().words(v.value)
        }
    };
    let level = |a: &str, b: &str| -> f64 {
        if a == b {
            1.0
        } else if crate::analyzers::double_metaphone(a).intersects(&crate::analyzers::double_metaphone(b)) {
            cfg.phonetic_weight
        } else if (a.len() == 1 && b.starts_with(a)) || (b.len() == 1 && a.starts_with(b)) {
            cfg.initial_weight
        } else if crate::analyzers::ngram_sim(a, b, cfg.ngram_n).unwrap() >= cfg.value_match_threshold {
            crate::analyzers::edit_sim(a, b)
        } else {
            0.0
        }
    };
    let mut total = 0.0;
    let keys: Vec<&str> = p.keys().intersection(&q.keys()).copied().filter(|k| *k != "type").collect();
    for key in keys {
        let mut m: f64 = 0.0;
        let mut i: f64 = 0.0;
        for v1 in p.values_of(key) {
            for v2 in q.values_of(key) {
                let pf = provenance_factor(v1.prov, v2.prov, cfg);
                for a in words_of(&v1) {
                    for b in words_of(&v2) {
                        let l = level(&a, &b);
                        if l >= cfg.value_match_threshold && l > 0.0 {
                            m = m.max(l * pf);
                            i = i.max((cfg.inf(index.word_count(&a)) + cfg.inf(index.word_count(&b))) / 2.0);
                        }
                    }
                }
            }
        }
        total += m * i;
    }
    total
}

const NAMES: &[&str] = &["john", "jon", "peter", "pete", "smith", "smyth", "ann", "anne", "bob", "robert"];
const STREETS: &[&str] = &["1 brown st", "1 brown street", "2 green rd", "9 high ave"];
const YEARS: &[&str] = &["1985", "1990", "1995", "2000", "2005"];

fn tiny_profile(n: &'static str) -> impl Strategy<Value = Profile> {
    let value = prop::sample::select(NAMES);
    let prov = prop::option::of((prop::sample::select(&["from", "until"][..]), prop::sample::select(YEARS)));
    let names = prop::collection::vec((value, prov), 0..3);
    let street = prop::option::of(prop::sample::select(STREETS));
    let target = prop::option::of(prop::sample::select(&["A", "B", "C", "D", "E", "Q"][..]));
    (names, street, target).prop_map(move |(names, street, target)| {
        let mut attrs = vec![AttributeObject::new("type", "person")];
        for (v, prov) in names {
            let mut a = AttributeObject::new("name", v);
            if let Some((k, y)) = prov {
                a = a.with_prov(k, y);
            }
            attrs.push(a);
        }
        if let Some(s) = street {
            attrs.push(AttributeObject::new("street", s));
        }
        let rels = target.into_iter().map(|t| RelationObject::new("knows", id(t))).collect();
        Profile::new(id(n), attrs, rels).unwrap()
    })
}

fn micro_corpus() -> impl Strategy<Value = Vec<Profile>> {
    (tiny_profile("A"), tiny_profile("B"), tiny_profile("C"), tiny_profile("D"), tiny_profile("E"))
        .prop_map(|(a, b, c, d, e)| vec![a, b, c, d, e])
}

proptest! {
    #[test]
    fn simsc_matches_brute_force(corpus in micro_corpus()) {
        let cfg = MatchConfig::default();
        let index = index_of(&corpus);
        for p in &corpus {
            for q in corpus.iter().filter(|q| q.id() != p.id()) {
                let got = simsc(p, q, &index, &cfg).unwrap();
                let want = oracle_simsc(p, q, &index, &cfg);
                prop_assert!((got - want).abs() < 1e-9, "{} {}: {got} vs {want}", p.id(), q.id());
            }
        }
    }

    #[test]
    fn simsc_is_symmetric(corpus in micro_corpus()) {
        let cfg = MatchConfig::default();
        let index = index_of(&corpus);
        for p in &corpus {
            for q in corpus.iter().filter(|q| q.id() != p.id()) {
                prop_assert_eq!(simsc(p, q, &index, &cfg).unwrap(), simsc(q, p, &index, &cfg).unwrap());
                prop_assert_eq!(rejsc(p, q, &index, &cfg), rejsc(q, p, &index, &cfg));
            }
        }
    }

    #[test]
    fn rejsc_bounded_by_key_attributes(y1 in 1950u16..2000, y2 in 1950u16..2000, same_type in any::<bool>()) {
        let cfg = MatchConfig::default();
        let index = index_of(&[]);
        let a = person("A", &[("bdate", &format!("{y1}-01-01"))]);
        let mut b = person("B", &[("bdate", &format!("{y2}-01-01"))]);
        if !same_type {
            b = Profile::new(id("B"), vec![AttributeObject::new("type", "location")], vec![]).unwrap();
        }
        let r = rejsc(&a, &b, &index, &cfg);
        prop_assert!(r <= 1);
        prop_assert_eq!(r, u32::from(same_type && y1 != y2));
    }

    #[test]
    fn rarer_word_never_lowers_simsc(common in 1u64..900, rare_gap in 1u64..900) {
        // Two pairs that match on one word; the second word is shared by fewer profiles.
        let cfg = MatchConfig::default();
        let rare = common.saturating_sub(rare_gap);
        let mut corpus = vec![person("A", &[("name", "zork")]), person("B", &[("name", "zork")])];
        corpus.push(person("C", &[("name", "quux")]));
        corpus.push(person("D", &[("name", "quux")]));
        for i in 0..common.saturating_sub(2) {
            corpus.push(person(&format!("F{i:04}"), &[("x", "zork")]));
        }
        for i in 0..rare.saturating_sub(2) {
            corpus.push(person(&format!("G{i:04}"), &[("x", "quux")]));
        }
        let index = index_of(&corpus);
        let common_score = simsc(&corpus[0], &corpus[1], &index, &cfg).unwrap();
        let rare_score = simsc(&corpus[2], &corpus[3], &index, &cfg).unwrap();
        prop_assert!(rare_score >= common_score);
    }
}
