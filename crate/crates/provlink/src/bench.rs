//! Update-transaction benchmark across the similarity-store layouts.
//!
//! For every pair count and iteration, one synthetic batch is generated and
//! each layout gets a fresh store: the batch is inserted, every pair is
//! searched, then the whole batch is re-scored through
//! [`SimStore::update_transaction`] (search, delete, insert per pair). Only
//! the store calls are timed.

use std::collections::BTreeMap;
use std::hint::black_box;
use std::io::{self, Write};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use provlink_core::{Layout, ProfileId, SimilarityEdge};

pub const DEFAULT_PAIR_COUNTS: [usize; 5] = [10_000, 31_623, 100_000, 316_228, 1_000_000];
pub const DEFAULT_ITERATIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Op {
    Insert,
    Search,
    Update,
}

impl Op {
    pub const ALL: [Op; 3] = [Op::Insert, Op::Search, Op::Update];

    pub fn as_str(self) -> &'static str {
        match self {
            Op::Insert => "insert",
            Op::Search => "search",
            Op::Update => "update",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub layouts: Vec<Layout>,
    pub pair_counts: Vec<usize>,
    pub iterations: usize,
    pub seed: u64,
    pub tau_store: f64,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            layouts: Layout::ALL.to_vec(),
            pair_counts: DEFAULT_PAIR_COUNTS.to_vec(),
            iterations: DEFAULT_ITERATIONS,
            seed: 7,
            tau_store: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub layout: Layout,
    pub pairs: usize,
    pub iteration: usize,
    pub op: Op,
    pub seconds: f64,
}

/// Mean timings of one layout, aligned with `pair_counts`.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub layout: Layout,
    pub pair_counts: Vec<usize>,
    /// Mean update-transaction seconds.
    pub avg_txn_seconds: Vec<f64>,
    pub ops: BTreeMap<Op, Vec<f64>>,
}

/// `count` random canonical pairs over a pool of `ceil(sqrt(2 * count))` ids,
/// with scores at or above `tau_store`.
pub fn synthetic_pairs(count: usize, seed: u64, tau_store: f64) -> Vec<SimilarityEdge> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = ((2.0 * count as f64).sqrt().ceil() as usize).max(2);
    let ids: Vec<ProfileId> = (0..pool).map(|i| ProfileId::new(format!("B{i:07}")).expect("valid id")).collect();
    (0..count)
        .map(|_| {
            let a = rng.random_range(0..pool);
            let mut b = rng.random_range(0..pool - 1);
            if b >= a {
                b += 1;
            }
            let simsc = tau_store + rng.random_range(0.0..5.0);
            let rejsc = rng.random_range(0..2);
            SimilarityEdge::new(ids[a].clone(), ids[b].clone(), simsc, rejsc).expect("distinct ids")
        })
        .collect()
}

fn rescored(batch: &[SimilarityEdge], seed: u64, tau_store: f64) -> Vec<SimilarityEdge> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    batch
        .iter()
        .map(|e| SimilarityEdge { simsc: tau_store + rng.random_range(0.0..5.0), ..e.clone() })
        .collect()
}

fn time<T>(f: impl FnOnce() -> T) -> f64 {
    let start = Instant::now();
    black_box(f());
    start.elapsed().as_secs_f64()
}

/// Runs one iteration of one layout and returns `(op, seconds)` per phase.
pub fn run_once(layout: Layout, batch: &[SimilarityEdge], update: &[SimilarityEdge], tau_store: f64) -> [(Op, f64); 3] {
    let mut store = layout.create(tau_store);
    let insert = time(|| {
        for e in batch {
            store.upsert_edge(e).expect("synthetic edges are valid");
        }
    });
    let search = time(|| batch.iter().filter(|e| store.contains_pair(&e.id1, &e.id2)).count());
    let txn = time(|| store.update_transaction(update).expect("synthetic edges are valid"));
    drop(black_box(store));
    [(Op::Insert, insert), (Op::Search, search), (Op::Update, txn)]
}

/// Runs the whole grid. `progress` sees every sample as it is taken.
pub fn run(spec: &BenchSpec, mut progress: impl FnMut(&Sample)) -> (Vec<Sample>, Vec<BenchReport>) {
    let mut samples = Vec::new();
    for &pairs in &spec.pair_counts {
        for iteration in 0..spec.iterations {
            let seed = spec.seed.wrapping_mul(1_000_003).wrapping_add((pairs as u64) << 8 | iteration as u64);
            let batch = synthetic_pairs(pairs, seed, spec.tau_store);
            let update = rescored(&batch, seed ^ 0x5eed, spec.tau_store);
            for &layout in &spec.layouts {
                for (op, seconds) in run_once(layout, &batch, &update, spec.tau_store) {
                    let s = Sample { layout, pairs, iteration, op, seconds };
                    progress(&s);
                    samples.push(s);
                }
            }
        }
    }
    let reports = summarize(spec, &samples);
    (samples, reports)
}

pub fn summarize(spec: &BenchSpec, samples: &[Sample]) -> Vec<BenchReport> {
    spec.layouts
        .iter()
        .map(|&layout| {
            let mean = |pairs: usize, op: Op| {
                let xs: Vec<f64> = samples
                    .iter()
                    .filter(|s| s.layout == layout && s.pairs == pairs && s.op == op)
                    .map(|s| s.seconds)
                    .collect();
                xs.iter().sum::<f64>() / xs.len().max(1) as f64
            };
            let ops: BTreeMap<Op, Vec<f64>> = Op::ALL
                .into_iter()
                .map(|op| (op, spec.pair_counts.iter().map(|&n| mean(n, op)).collect()))
                .collect();
            BenchReport {
                layout,
                pair_counts: spec.pair_counts.clone(),
                avg_txn_seconds: ops[&Op::Update].clone(),
                ops,
            }
        })
        .collect()
}

/// `layout,pairs,iteration,seconds,op` rows, then one `mean` row per
/// layout, pair count and operation.
pub fn write_csv(w: &mut impl Write, samples: &[Sample], reports: &[BenchReport]) -> io::Result<()> {
    writeln!(w, "layout,pairs,iteration,seconds,op")?;
    for s in samples {
        writeln!(w, "{},{},{},{:.9},{}", s.layout, s.pairs, s.iteration, s.seconds, s.op.as_str())?;
    }
    for r in reports {
        for (op, means) in &r.ops {
            for (pairs, mean) in r.pair_counts.iter().zip(means) {
                writeln!(w, "{},{},mean,{:.9},{}", r.layout, pairs, mean, op.as_str())?;
            }
        }
    }
    Ok(())
}

/// One gnuplot data block per layout (select with `index N`), columns:
/// pairs, log2(pairs), mean update seconds, log2(mean update seconds).
pub fn write_gnuplot(w: &mut impl Write, reports: &[BenchReport]) -> io::Result<()> {
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            writeln!(w, "\n")?;
        }
        writeln!(w, "# {}", r.layout)?;
        writeln!(w, "# pairs log2_pairs update_seconds log2_update_seconds")?;
        for (pairs, secs) in r.pair_counts.iter().zip(&r.avg_txn_seconds) {
            writeln!(w, "{} {:.6} {:.9} {:.6}", pairs, (*pairs as f64).log2(), secs, secs.log2())?;
        }
    }
    Ok(())
}
