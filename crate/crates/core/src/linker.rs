//! Blocking, pairwise scoring and similarity-edge maintenance, plus the
//! confirmation path that pins a decision.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::indexer::Index;
use crate::profile::{canonical_pair, Decision, Profile, ProfileId, SimilarityEdge};
use crate::scoring::{score_features, Features, MatchConfig, PairScore};
use crate::sim::SimStore;

/// A reviewer's ruling on a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ConfirmedMatch,
    ConfirmedNonmatch,
}

impl Verdict {
    pub fn decision(self) -> Decision {
        match self {
            Verdict::ConfirmedMatch => Decision::Match,
            Verdict::ConfirmedNonmatch => Decision::Nonmatch,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ConfirmedMatch => "confirmed_match",
            Verdict::ConfirmedNonmatch => "confirmed_nonmatch",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = Error;

    /// Accepts `match`/`nonmatch` as well as the `confirmed_` forms.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "match" | "confirmed_match" => Ok(Verdict::ConfirmedMatch),
            "nonmatch" | "confirmed_nonmatch" => Ok(Verdict::ConfirmedNonmatch),
            other => Err(Error::MalformedQuery(alloc::format!("unknown verdict {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkRunStats {
    pub profiles_processed: u64,
    pub pairs_scored: u64,
    pub edges_upserted: u64,
    pub edges_pruned: u64,
    /// Left at zero here; the caller owns the clock.
    pub elapsed_seconds: f64,
}

/// Match iff the score clears `tau_match` with at most `rho_max` key
/// conflicts; nonmatch below `tau_store`; pending otherwise.
pub fn predict(simsc: f64, rejsc: u32, cfg: &MatchConfig) -> Decision {
    if simsc >= cfg.tau_match && rejsc <= cfg.rho_max {
        Decision::Match
    } else if simsc < cfg.tau_store {
        Decision::Nonmatch
    } else {
        Decision::Pending
    }
}

enum Applied {
    Upserted(SimilarityEdge),
    Pruned,
    Unchanged,
}

/// Stores the fresh score of `{a, b}`. Confirmed edges keep their ruling;
/// unconfirmed edges that fall below `tau_store` are dropped.
fn apply<S: SimStore + ?Sized>(
    store: &mut S,
    a: &ProfileId,
    b: &ProfileId,
    score: PairScore,
    cfg: &MatchConfig,
) -> Result<Applied> {
    let existing = store.get_edge(a, b).ok();
    if score.simsc < store.tau_store() {
        return Ok(match existing {
            Some(e) if !e.cfm => {
                store.delete_edge(a, b);
                Applied::Pruned
            }
            _ => Applied::Unchanged,
        });
    }
    let mut edge = SimilarityEdge::new(a.clone(), b.clone(), score.simsc, score.rejsc)?;
    match existing {
        Some(old) if old.cfm => {
            edge.cfm = true;
            edge.decision = old.decision;
        }
        _ => edge.decision = predict(score.simsc, score.rejsc, cfg),
    }
    store.update_transaction(core::slice::from_ref(&edge))?;
    Ok(Applied::Upserted(edge))
}

struct Run<'a, R> {
    index: &'a Index,
    resolve: R,
    cfg: &'a MatchConfig,
    features: BTreeMap<ProfileId, Option<Features>>,
    stats: LinkRunStats,
}

impl<R> Run<'_, R>
where
    R: Fn(&ProfileId) -> Option<Profile>,
{
    fn features(&mut self, id: &ProfileId) -> Option<&Features> {
        if !self.features.contains_key(id) {
            let f = (self.resolve)(id).map(|p| Features::of(&p, self.index));
            self.features.insert(id.clone(), f);
        }
        self.features[id].as_ref()
    }

    fn partners<S: SimStore + ?Sized>(&self, id: &ProfileId, store: &S) -> BTreeSet<ProfileId> {
        let mut out: BTreeSet<ProfileId> = self.index.candidates(id, self.cfg.candidates_k).into_iter().collect();
        out.extend(store.neighbors(id).iter().map(|e| e.other(id).clone()));
        out.remove(id);
        out
    }

    fn link<S: SimStore + ?Sized>(
        &mut self,
        id: &ProfileId,
        store: &mut S,
        seen: Option<&mut BTreeSet<(ProfileId, ProfileId)>>,
    ) -> Result<Vec<SimilarityEdge>> {
        if self.features(id).is_none() {
            return Err(Error::NotFound(id.clone()));
        }
        self.stats.profiles_processed += 1;
        let mut partners = self.partners(id, store);
        if let Some(seen) = seen {
            partners.retain(|other| {
                let pair = canonical_pair(id.clone(), other.clone()).expect("partners exclude self");
                seen.insert(pair)
            });
        }
        let mut upserted = Vec::new();
        for other in partners {
            if self.features(&other).is_none() {
                // Stale edge to a profile that no longer exists.
                if store.delete_edge(id, &other) {
                    self.stats.edges_pruned += 1;
                }
                continue;
            }
            let (Some(mine), Some(theirs)) = (&self.features[id], &self.features[&other]) else {
                unreachable!("both feature sets were just loaded");
            };
            let score = score_features(mine, theirs, self.index, self.cfg)?;
            self.stats.pairs_scored += 1;
            match apply(store, id, &other, score, self.cfg)? {
                Applied::Upserted(e) => {
                    self.stats.edges_upserted += 1;
                    upserted.push(e);
                }
                Applied::Pruned => self.stats.edges_pruned += 1,
                Applied::Unchanged => {}
            }
        }
        Ok(upserted)
    }
}

/// Scores `id` against its blocking candidates and its current neighbors and
/// writes the results to `store`. Returns the edges written.
pub fn link_profile<S, R>(
    id: &ProfileId,
    index: &Index,
    resolve: R,
    store: &mut S,
    cfg: &MatchConfig,
) -> Result<Vec<SimilarityEdge>>
where
    S: SimStore + ?Sized,
    R: Fn(&ProfileId) -> Option<Profile>,
{
    let mut run = Run { index, resolve, cfg, features: BTreeMap::new(), stats: LinkRunStats::default() };
    run.link(id, store, None)
}

/// Links every indexed profile in ascending id order, scoring each
/// unordered pair at most once.
pub fn link_all<S, R>(index: &Index, resolve: R, store: &mut S, cfg: &MatchConfig) -> Result<LinkRunStats>
where
    S: SimStore + ?Sized,
    R: Fn(&ProfileId) -> Option<Profile>,
{
    let mut run = Run { index, resolve, cfg, features: BTreeMap::new(), stats: LinkRunStats::default() };
    let mut seen = BTreeSet::new();
    let ids: Vec<ProfileId> = index.ids().cloned().collect();
    for id in &ids {
        match run.link(id, store, Some(&mut seen)) {
            Ok(_) | Err(Error::NotFound(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(run.stats)
}

/// A link run driven one profile at a time, so callers can interleave other
/// work (reads, confirmations, edits) between steps. Pairs already scored in
/// this run are skipped.
#[derive(Debug, Clone, Default)]
pub struct LinkRun {
    seen: BTreeSet<(ProfileId, ProfileId)>,
    stats: LinkRunStats,
}

impl LinkRun {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stats(&self) -> LinkRunStats {
        self.stats
    }

    /// Links `id`; a profile deleted since the run started is skipped.
    pub fn step<S, R>(&mut self, id: &ProfileId, index: &Index, resolve: R, store: &mut S, cfg: &MatchConfig) -> Result<()>
    where
        S: SimStore + ?Sized,
        R: Fn(&ProfileId) -> Option<Profile>,
    {
        let mut run = Run { index, resolve, cfg, features: BTreeMap::new(), stats: self.stats };
        let result = run.link(id, store, Some(&mut self.seen));
        self.stats = run.stats;
        match result {
            Ok(_) | Err(Error::NotFound(_)) => Ok(()),
            Err(e) => Err(e),
        }
    }
}

/// Records a reviewer's verdict on an existing edge.
pub fn confirm<S: SimStore + ?Sized>(store: &mut S, a: &ProfileId, b: &ProfileId, verdict: Verdict) -> Result<SimilarityEdge> {
    let mut edge = store.get_edge(a, b)?;
    edge.cfm = true;
    edge.decision = verdict.decision();
    store.update_transaction(core::slice::from_ref(&edge))?;
    Ok(edge)
}

#[cfg(test)]
mod tests;
