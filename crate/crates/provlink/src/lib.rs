//! Std companion to `provlink-core`: on-disk persistence, JSONL/CSV/triple
//! ingestion, the sim-store benchmark, an HTTP API and the `provlink` CLI.

pub mod bench;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod ingest;
pub mod jsonl;
pub mod persist;
pub mod server;

pub use engine::Engine;
pub use error::{Error, Result};
