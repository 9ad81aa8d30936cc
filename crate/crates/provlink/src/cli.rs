//! `provlink` command line. Exit codes: 0 success, 1 usage, 2 runtime error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use provlink_core::{Layout, ProfileId, Verdict};

use crate::bench::{self, BenchSpec};
use crate::config::Settings;
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::ingest::{self, CsvMapping};
use crate::jsonl;
use crate::server::{self, AppState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "provlink", version, about = "Entity linking over provenance-aware profiles")]
pub struct Cli {
    /// Data directory holding kb/, idx/ and sim/.
    #[arg(long, global = true, default_value = "data")]
    pub data: PathBuf,
    /// key=value settings file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Jsonl,
    Csv,
    Triples,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load profiles from a file.
    Ingest {
        format: Format,
        path: PathBuf,
        /// TOML column mapping (csv only).
        #[arg(long)]
        mapping: Option<PathBuf>,
    },
    /// Score candidate pairs of every profile and refresh the similarity store.
    Link {
        /// Candidates per profile.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Keyword search.
    Search {
        query: String,
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// Print a profile as a JSONL line.
    Get { id: String },
    /// Record a human verdict on a stored pair.
    Confirm { id1: String, id2: String, verdict: Verdict },
    /// Time update transactions per sim-store layout.
    Bench {
        #[arg(long, value_delimiter = ',')]
        layouts: Option<Vec<Layout>>,
        #[arg(long, value_delimiter = ',')]
        pairs: Option<Vec<usize>>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Output CSV; a .gp file is written next to it.
        #[arg(long, default_value = "bench.csv")]
        out: PathBuf,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "PORT", default_value_t = 8087)]
        port: u16,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn settings(config: Option<&Path>) -> Result<Settings> {
    match config {
        Some(path) => Settings::load(path),
        None => Ok(Settings::default()),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let mut settings = settings(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest { format, path, mapping } => {
            let mut engine = Engine::open(&cli.data, settings)?;
            let report = match format {
                Format::Jsonl => ingest::ingest_jsonl(&mut engine, &path)?,
                Format::Csv => {
                    let mapping = mapping.ok_or_else(|| Error::Mapping("csv ingestion needs --mapping".into()))?;
                    ingest::ingest_csv(&mut engine, &path, &CsvMapping::load(&mapping)?)?
                }
                Format::Triples => ingest::ingest_triples(&mut engine, &path)?,
            };
            engine.checkpoint()?;
            for e in &report.errors {
                eprintln!("skipped: {e}");
            }
            println!("{} profiles ingested", report.accepted);
        }
        Command::Link { k } => {
            if let Some(k) = k {
                settings.cfg.candidates_k = k;
            }
            let mut engine = Engine::open(&cli.data, settings)?;
            let stats = engine.link_all()?;
            engine.checkpoint()?;
            println!(
                "{} profiles, {} pairs scored, {} edges stored, {} pruned in {:.3}s",
                stats.profiles_processed, stats.pairs_scored, stats.edges_upserted, stats.edges_pruned, stats.elapsed_seconds
            );
        }
        Command::Search { query, k } => {
            let engine = Engine::open(&cli.data, settings)?;
            for (id, score) in engine.search(&query, k) {
                println!("{id}\t{score:.6}");
            }
        }
        Command::Get { id } => {
            let engine = Engine::open(&cli.data, settings)?;
            let p = engine.profile(&ProfileId::new(id)?)?;
            println!("{}", jsonl::to_line(&p));
        }
        Command::Confirm { id1, id2, verdict } => {
            let mut engine = Engine::open(&cli.data, settings)?;
            let edge = engine.confirm(&ProfileId::new(id1)?, &ProfileId::new(id2)?, verdict)?;
            engine.checkpoint()?;
            println!("{}", serde_json::to_string(&jsonl::EdgeDoc::from(&edge)).expect("edge serializes"));
        }
        Command::Bench { layouts, pairs, iters, seed, out } => {
            let mut spec = BenchSpec { seed, tau_store: settings.cfg.tau_store, ..BenchSpec::default() };
            if let Some(layouts) = layouts {
                spec.layouts = layouts;
            }
            if let Some(pairs) = pairs {
                spec.pair_counts = pairs;
            }
            if let Some(iters) = iters {
                spec.iterations = iters;
            }
            let (samples, reports) = bench::run(&spec, |s| {
                eprintln!("{} {} {} #{} {:.4}s", s.layout, s.op.as_str(), s.pairs, s.iteration, s.seconds);
            });
            let mut csv = Vec::new();
            bench::write_csv(&mut csv, &samples, &reports).map_err(|e| Error::io(&out, e))?;
            std::fs::write(&out, csv).map_err(|e| Error::io(&out, e))?;
            let plot = out.with_extension("gp");
            let mut gp = Vec::new();
            bench::write_gnuplot(&mut gp, &reports).map_err(|e| Error::io(&plot, e))?;
            std::fs::write(&plot, gp).map_err(|e| Error::io(&plot, e))?;
            for r in &reports {
                let times: Vec<String> = r.avg_txn_seconds.iter().map(|t| format!("{t:.4}")).collect();
                println!("{}\t{}", r.layout, times.join("\t"));
            }
            println!("report written to {}", out.display());
        }
        Command::Serve { port } => {
            let engine = Engine::open(&cli.data, settings)?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io("tokio runtime", e))?;
            rt.block_on(server::serve(AppState::new(engine), port))?;
        }
    }
    Ok(())
}
