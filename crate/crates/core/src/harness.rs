//! Timing and precision harness.
//!
//! Queries are bucketed by the floor power of ten of their valid subtree
//! count and, separately, of their pattern count; both counts come from a
//! full enumeration so every engine lands in the same bucket.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::SearchError;
use crate::graph::KnowledgeGraph;
use crate::index::PathIndex;
use crate::scoring::ScoringConfig;
use crate::search::{
    search_baseline, search_linear_enum, search_linear_topk, search_pattern_enum, Query, SamplingConfig, SearchOutcome,
    TreePattern,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Baseline,
    PatternEnum,
    Linear,
    LinearTopk,
}

impl Engine {
    pub const ALL: [Engine; 4] = [Engine::Baseline, Engine::PatternEnum, Engine::Linear, Engine::LinearTopk];

    pub fn name(self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::PatternEnum => "pattern-enum",
            Self::Linear => "linear",
            Self::LinearTopk => "linear-topk",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

/// Runs one engine. `sampling` only affects [`Engine::LinearTopk`].
pub fn run_query(
    engine: Engine,
    g: &KnowledgeGraph,
    idx: &PathIndex,
    q: &Query,
    cfg: &ScoringConfig,
    sampling: &SamplingConfig,
) -> Result<SearchOutcome, SearchError> {
    match engine {
        Engine::Baseline => search_baseline(g, idx, q, cfg),
        Engine::PatternEnum => search_pattern_enum(idx, q, cfg),
        Engine::Linear => {
            let all = search_linear_enum(idx, q);
            Ok(SearchOutcome { patterns: all.rank(cfg, q.k())?, stats: all.stats })
        }
        Engine::LinearTopk => search_linear_topk(idx, q, cfg, sampling),
    }
}

/// `n` queries of `m` distinct keywords each, drawn uniformly from the
/// `pool` index words with the most paths. Deterministic per seed.
pub fn random_queries(idx: &PathIndex, n: usize, m: usize, k: usize, pool: usize, seed: u64) -> Vec<Query> {
    let mut words: Vec<(&str, usize)> = idx.blocks().map(|(w, b)| (w, b.len())).collect();
    words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    words.truncate(pool.max(m));
    if words.len() < m || m == 0 || k == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let picked = words.choose_multiple(&mut rng, m).map(|&(w, _)| w);
            Query::new(picked, k).expect("non-empty keywords and k")
        })
        .collect()
}

/// Floor power of ten; 0 for 0.
pub fn bucket(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut b = 1;
    while b <= n / 10 {
        b *= 10;
    }
    b
}

/// Geometric mean of the positive entries; `None` if there are none.
pub fn geometric_mean(xs: &[f64]) -> Option<f64> {
    let pos: Vec<f64> = xs.iter().copied().filter(|&x| x > 0.0).collect();
    if pos.is_empty() {
        return None;
    }
    Some((pos.iter().map(|x| x.ln()).sum::<f64>() / pos.len() as f64).exp())
}

/// Share of `exact` that also appears in `found`; 1 when `exact` is empty.
pub fn precision(found: &[TreePattern], exact: &[TreePattern]) -> f64 {
    if exact.is_empty() {
        return 1.0;
    }
    let hits = exact.iter().filter(|p| found.contains(p)).count();
    hits as f64 / exact.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryRecord {
    pub query: String,
    pub algorithm: Engine,
    pub seconds: f64,
    /// Valid subtrees `N`.
    pub subtrees: u64,
    pub patterns: usize,
    pub subtree_bucket: u64,
    pub pattern_bucket: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketSummary {
    /// `subtrees` or `patterns`.
    pub grouping: &'static str,
    pub bucket: u64,
    pub algorithm: Engine,
    pub queries: usize,
    pub min_seconds: f64,
    pub geomean_seconds: f64,
    pub max_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionRecord {
    pub query: String,
    pub lambda: Option<u64>,
    pub rho: f64,
    pub seed: u64,
    pub precision: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BenchReport {
    pub records: Vec<QueryRecord>,
    pub summary: Vec<BucketSummary>,
    pub precision: Vec<PrecisionRecord>,
}

fn summarize(records: &[QueryRecord]) -> Vec<BucketSummary> {
    let mut groups: BTreeMap<(&'static str, u64, Engine), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry(("patterns", r.pattern_bucket, r.algorithm)).or_default().push(r.seconds);
        groups.entry(("subtrees", r.subtree_bucket, r.algorithm)).or_default().push(r.seconds);
    }
    groups
        .into_iter()
        .map(|((grouping, bucket, algorithm), times)| BucketSummary {
            grouping,
            bucket,
            algorithm,
            queries: times.len(),
            min_seconds: times.iter().copied().fold(f64::INFINITY, f64::min),
            geomean_seconds: geometric_mean(&times).unwrap_or(0.0),
            max_seconds: times.iter().copied().fold(0.0, f64::max),
        })
        .collect()
}

fn query_text(q: &Query) -> String {
    q.keywords().join(" ")
}

/// Times every engine on every query. With `parallel`, queries run
/// concurrently; everything but the timings stays the same.
pub fn run_bench(
    g: &KnowledgeGraph,
    idx: &PathIndex,
    queries: &[Query],
    engines: &[Engine],
    cfg: &ScoringConfig,
    sampling: &SamplingConfig,
    parallel: bool,
) -> Result<BenchReport, SearchError> {
    let one = |q: &Query| -> Result<Vec<QueryRecord>, SearchError> {
        let full = search_linear_enum(idx, q);
        let n = full.stats.accepted;
        let patterns = full.groups.len();
        engines
            .iter()
            .map(|&engine| {
                let start = Instant::now();
                run_query(engine, g, idx, q, cfg, sampling)?;
                Ok(QueryRecord {
                    query: query_text(q),
                    algorithm: engine,
                    seconds: start.elapsed().as_secs_f64(),
                    subtrees: n,
                    patterns,
                    subtree_bucket: bucket(n),
                    pattern_bucket: bucket(patterns as u64),
                })
            })
            .collect()
    };
    let per_query: Vec<Vec<QueryRecord>> = if parallel {
        queries.par_iter().map(one).collect::<Result<_, _>>()?
    } else {
        queries.iter().map(one).collect::<Result<_, _>>()?
    };
    let records: Vec<QueryRecord> = per_query.into_iter().flatten().collect();
    let summary = summarize(&records);
    Ok(BenchReport { records, summary, precision: Vec::new() })
}

/// Precision of sampled top-k against the exact top-k over a grid of
/// thresholds, rates and seeds.
pub fn run_precision_sweep(
    idx: &PathIndex,
    queries: &[Query],
    lambdas: &[Option<u64>],
    rhos: &[f64],
    seeds: &[u64],
    cfg: &ScoringConfig,
) -> Result<BenchReport, SearchError> {
    let mut precision_records = Vec::new();
    for q in queries {
        let exact: Vec<TreePattern> = search_linear_topk(idx, q, cfg, &SamplingConfig::exact())?
            .patterns
            .into_iter()
            .map(|p| p.pattern)
            .collect();
        for &lambda in lambdas {
            for &rho in rhos {
                for &seed in seeds {
                    let sampling = SamplingConfig { lambda, rho, seed };
                    let found: Vec<TreePattern> =
                        search_linear_topk(idx, q, cfg, &sampling)?.patterns.into_iter().map(|p| p.pattern).collect();
                    precision_records.push(PrecisionRecord {
                        query: query_text(q),
                        lambda,
                        rho,
                        seed,
                        precision: precision(&found, &exact),
                    });
                }
            }
        }
    }
    Ok(BenchReport { precision: precision_records, ..Default::default() })
}

impl BenchReport {
    fn csv_of<T: Serialize>(rows: &[T]) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    pub fn records_csv(&self) -> String {
        Self::csv_of(&self.records)
    }

    pub fn summary_csv(&self) -> String {
        Self::csv_of(&self.summary)
    }

    pub fn precision_csv(&self) -> String {
        Self::csv_of(&self.precision)
    }
}
