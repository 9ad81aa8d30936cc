//! Entity profiles with multi-valued, provenance-annotated attributes and
//! relations, and the machinery to block, score and link them.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is an in-memory
//! data structure or a pure function; durable storage, file formats, timing
//! and the network service live in the `provlink` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analyzers;
mod error;
pub mod indexer;
pub mod kb;
pub mod kv;
pub mod linker;
pub mod profile;
pub mod scoring;
pub mod sim;
pub mod temporal;

pub use error::{Error, Result};
pub use indexer::{Index, NestedClause, NestedQuery, SummaryBag, WordStats};
pub use kb::{KbStore, NodeRow, RowKind};
pub use linker::{LinkRun, LinkRunStats, Verdict};
pub use profile::{
    AttributeObject, Decision, Profile, ProfileId, ProfilesGraph, ProvPair, RelationEdge,
    RelationObject, SimilarityEdge,
};
pub use scoring::MatchConfig;
pub use sim::{Layout, SimStore};
