use alloc::string::String;

use crate::profile::ProfileId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid profile id {0:?}: ids must be non-empty and must not contain '-'")]
    InvalidId(String),
    #[error("empty key in {0}")]
    EmptyKey(&'static str),
    #[error("empty value for key {0:?}")]
    EmptyValue(String),
    #[error("provenance {pkey}={pvalue:?} is not a calendar date")]
    InvalidProvenance { pkey: String, pvalue: String },
    #[error("profile {0} not found")]
    NotFound(ProfileId),
    #[error("no similarity edge between {0} and {1}")]
    EdgeNotFound(ProfileId, ProfileId),
    #[error("a profile cannot be paired with itself ({0})")]
    SameId(ProfileId),
    #[error("similarity {simsc} is below the store threshold {tau}")]
    BelowThreshold { simsc: f64, tau: f64 },
    #[error("edge ({0}, {1}) is not in canonical order")]
    NonCanonicalPair(ProfileId, ProfileId),
    #[error("confirmed edge ({0}, {1}) must carry a match or nonmatch decision")]
    ConfirmedPending(ProfileId, ProfileId),
    #[error("n-gram size must be at least 1")]
    InvalidN,
    #[error("malformed query: {0}")]
    MalformedQuery(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown layout {0:?}")]
    UnknownLayout(String),
}
