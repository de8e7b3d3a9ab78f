//! `kgp`: build path indexes over a knowledge graph and answer keyword
//! queries with ranked tree patterns.

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kgp_core::gen::{generate_graph, GenConfig};
use kgp_core::graph::{DEFAULT_DAMPING, DEFAULT_TOLERANCE};
use kgp_core::harness::{random_queries, run_bench, run_precision_sweep, run_query, Engine};
use kgp_core::output::{QueryRun, ResultDocument};
use kgp_core::{
    brute_force_patterns, build_indexes, compute_pagerank, deserialize, load_graph_with, serialize, KnowledgeGraph,
    PathIndex, Query, SamplingConfig, ScoreError, ScoringConfig, SearchError, Tokenizer,
};
use serde::Serialize;

/// Failure classes, mapped to exit codes 1 and 2.
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

type Result<T> = std::result::Result<T, Failure>;

#[derive(Parser)]
#[command(name = "kgp", version, about = "Keyword search over knowledge graphs, answered as ranked tree patterns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic graph file.
    Gen(GenArgs),
    /// Build and save the path index of a graph.
    Build(BuildArgs),
    /// Answer one keyword query.
    Query(QueryArgs),
    /// Time engines over a query workload.
    Bench(BenchArgs),
    /// Precision of sampled top-k over a grid of thresholds and rates.
    Sweep(SweepArgs),
    /// Exhaustive pattern list or count, for small graphs.
    Oracle(OracleArgs),
    /// Print an index as JSON.
    DumpIndex(DumpArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1000)]
    entities: usize,
    #[arg(long, default_value_t = 10)]
    types: usize,
    #[arg(long, default_value_t = 20)]
    attrs: usize,
    /// Average number of outgoing edges per entity.
    #[arg(long, default_value_t = 3.0)]
    degree: f64,
    #[arg(long, default_value_t = 500)]
    vocabulary: usize,
    /// Words per entity description.
    #[arg(long, default_value_t = 3)]
    words: usize,
    #[arg(long, default_value_t = 1.0)]
    zipf: f64,
    /// Share of edges ending in a literal value.
    #[arg(long, default_value_t = 0.1)]
    literal_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    /// Graph file (line records or JSON lines).
    #[arg(long)]
    graph: PathBuf,
    /// Synonym file: one `word canonical` pair per line.
    #[arg(long)]
    synonyms: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Height threshold: maximum nodes per indexed path.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..=16))]
    d: u32,
    #[arg(long, default_value_t = DEFAULT_DAMPING)]
    damping: f64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Output index file.
    #[arg(long)]
    out: PathBuf,
}

/// Graph plus an index, either loaded or built on the fly.
#[derive(Args)]
struct IndexedGraphArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Prebuilt index; built in memory when absent.
    #[arg(long)]
    index: Option<PathBuf>,
    /// Height threshold for an in-memory index; must match a loaded one.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=16))]
    d: Option<u32>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Scoring settings as TOML (`z1`, `z2`, `z3`, `aggregator`).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SamplingArgs {
    /// Sampling threshold; `inf` never samples.
    #[arg(long, default_value = "inf", value_parser = parse_lambda)]
    lambda: Lambda,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy)]
struct Lambda(Option<u64>);

fn parse_lambda(s: &str) -> std::result::Result<Lambda, String> {
    match s {
        "inf" | "infinity" | "∞" => Ok(Lambda(None)),
        _ => s.parse().map(|v| Lambda(Some(v))).map_err(|_| format!("`{s}` is neither a count nor `inf`")),
    }
}

impl SamplingArgs {
    fn config(&self) -> SamplingConfig {
        SamplingConfig { lambda: self.lambda.0, rho: self.rho, seed: self.seed }
    }
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    source: IndexedGraphArgs,
    /// Keywords, whitespace separated.
    #[arg(long)]
    q: String,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, default_value = "linear-topk")]
    algo: Engine,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WorkloadArgs {
    /// Query file, one query per line; `#` starts a comment.
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Without a query file: number of random queries.
    #[arg(long, default_value_t = 20)]
    random_queries: usize,
    /// Keywords per random query.
    #[arg(long, default_value_t = 2)]
    words: usize,
    /// Random keywords come from this many most frequent index words.
    #[arg(long, default_value_t = 50)]
    pool: usize,
    #[arg(long, default_value_t = 0)]
    query_seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    source: IndexedGraphArgs,
    #[command(flatten)]
    workload: WorkloadArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Engines to run; all when omitted.
    #[arg(long, value_delimiter = ',')]
    algo: Vec<Engine>,
    #[command(flatten)]
    sampling: SamplingArgs,
    /// Run queries concurrently.
    #[arg(long)]
    parallel: bool,
    /// Also write the per-query records as CSV here.
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: IndexedGraphArgs,
    #[command(flatten)]
    workload: WorkloadArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, value_delimiter = ',', default_value = "0", value_parser = parse_lambda)]
    lambdas: Vec<Lambda>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.5,1")]
    rhos: Vec<f64>,
    /// Seeds 0..N per grid point.
    #[arg(long, default_value_t = 30)]
    seeds: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    q: String,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..=16))]
    d: u32,
    /// Print only the number of patterns.
    #[arg(long)]
    count: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long)]
    index: PathBuf,
    /// Only this word.
    #[arg(long)]
    word: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A zero score factor comes from the data; everything else from the arguments.
fn search_failure(e: SearchError) -> Failure {
    match e {
        SearchError::Score(ScoreError::ZeroFactor { .. }) => Failure::Data(e.into()),
        _ => usage(e),
    }
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes()).context("cannot write to stdout")?;
            stdout.flush().context("cannot write to stdout")?;
        }
    }
    Ok(())
}

impl GraphArgs {
    fn tokenizer(&self) -> anyhow::Result<Tokenizer> {
        Ok(match &self.synonyms {
            Some(p) => Tokenizer::parse_synonyms(&read_text(p)?),
            None => Tokenizer::new(),
        })
    }

    fn load(&self) -> anyhow::Result<KnowledgeGraph> {
        let file = fs::File::open(&self.graph).with_context(|| format!("cannot open {}", self.graph.display()))?;
        load_graph_with(BufReader::new(file), self.tokenizer()?)
            .with_context(|| format!("cannot load graph {}", self.graph.display()))
    }
}

fn load_index(path: &Path) -> anyhow::Result<PathIndex> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    deserialize(&bytes).with_context(|| format!("cannot load index {}", path.display()))
}

impl IndexedGraphArgs {
    fn load(&self) -> Result<(KnowledgeGraph, PathIndex)> {
        let g = self.graph.load()?;
        let idx = match &self.index {
            Some(p) => {
                let idx = load_index(p)?;
                if idx.entity_count() != g.entity_count() || idx.type_names() != g.type_names().as_slice() {
                    return Err(Failure::Data(anyhow!("index {} was not built from this graph", p.display())));
                }
                if let Some(d) = self.d.filter(|&d| d as usize != idx.d()) {
                    return Err(usage(anyhow!("--d {d} does not match the index height {}", idx.d())));
                }
                idx
            }
            None => {
                let d = self.d.unwrap_or(3) as usize;
                build_indexes(&g, &compute_pagerank(&g, DEFAULT_DAMPING, DEFAULT_TOLERANCE), d)
            }
        };
        Ok((g, idx))
    }
}

impl SearchArgs {
    fn scoring(&self) -> Result<ScoringConfig> {
        let Some(p) = &self.config else {
            return Ok(ScoringConfig::default());
        };
        let cfg: ScoringConfig =
            toml::from_str(&read_text(p)?).with_context(|| format!("invalid scoring config {}", p.display()))?;
        Ok(cfg)
    }

    fn k(&self) -> usize {
        usize::try_from(self.k).unwrap_or(usize::MAX)
    }
}

impl WorkloadArgs {
    fn queries(&self, g: &KnowledgeGraph, idx: &PathIndex, k: usize) -> Result<Vec<Query>> {
        let Some(p) = &self.queries else {
            let qs = random_queries(idx, self.random_queries, self.words, k, self.pool, self.query_seed);
            if qs.is_empty() && self.random_queries > 0 {
                return Err(usage(anyhow!("the index has fewer than {} words", self.words)));
            }
            return Ok(qs);
        };
        read_text(p)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| Query::parse(l, k, g.tokenizer()).with_context(|| format!("bad query `{l}`")))
            .collect::<anyhow::Result<_>>()
            .map_err(Failure::Data)
    }
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    let cfg = GenConfig {
        entities: a.entities,
        types: a.types,
        attrs: a.attrs,
        avg_out_degree: a.degree,
        vocabulary: a.vocabulary,
        words_per_text: a.words,
        zipf_exponent: a.zipf,
        literal_fraction: a.literal_fraction,
        seed: a.seed,
    };
    if cfg.entities == 0 || cfg.types == 0 || cfg.attrs == 0 || cfg.vocabulary == 0 || cfg.words_per_text == 0 {
        return Err(usage(anyhow!("counts must be positive")));
    }
    if !(cfg.avg_out_degree > 0.0 && cfg.zipf_exponent > 0.0 && (0.0..=1.0).contains(&cfg.literal_fraction)) {
        return Err(usage(anyhow!("degree and zipf must be positive, literal fraction in [0, 1]")));
    }
    write_output(a.out.as_deref(), &generate_graph(&cfg))
}

fn cmd_build(a: &BuildArgs) -> Result<()> {
    if !(a.damping > 0.0 && a.damping < 1.0 && a.tolerance > 0.0) {
        return Err(usage(anyhow!("damping must lie in (0, 1) and tolerance be positive")));
    }
    let g = a.graph.load()?;
    let pr = compute_pagerank(&g, a.damping, a.tolerance);
    let idx = build_indexes(&g, &pr, a.d as usize);
    let bytes = serialize(&idx);
    fs::write(&a.out, &bytes).with_context(|| format!("cannot write {}", a.out.display()))?;
    let stats = idx.stats();
    log::info!("{} words, {} paths, {} bytes", stats.words, stats.entries, bytes.len());
    eprintln!("indexed {} words, {} paths, {} bytes", stats.words, stats.entries, bytes.len());
    Ok(())
}

fn check_rate(rho: f64) -> Result<()> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(usage(anyhow!("--rho must lie in (0, 1]")))
    }
}

fn cmd_query(a: &QueryArgs) -> Result<()> {
    check_rate(a.sampling.rho)?;
    let cfg = a.search.scoring()?;
    let (g, idx) = a.source.load()?;
    let q = Query::parse(&a.q, a.search.k(), g.tokenizer()).map_err(usage)?;
    let sampling = a.sampling.config();
    let out = run_query(a.algo, &g, &idx, &q, &cfg, &sampling).map_err(search_failure)?;
    out.stats.per_type.iter().filter(|t| t.rate < 1.0).for_each(|t| {
        log::info!("root type {} sampled: {} of {} roots", t.root_type.0, t.selected_roots, t.candidate_roots)
    });
    let run = QueryRun { text: &a.q, query: &q, algorithm: a.algo.name(), d: idx.d(), sampling, scoring: cfg };
    let doc = ResultDocument::build(&g, &run, &out.patterns, &out.stats).map_err(|e| Failure::Data(e.into()))?;
    let text = match a.format {
        Format::Json => doc.to_json_pretty() + "\n",
        Format::Text => doc.to_text(),
        Format::Csv => doc.to_csv(),
    };
    write_output(a.out.as_deref(), &text)
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    check_rate(a.sampling.rho)?;
    let cfg = a.search.scoring()?;
    let (g, idx) = a.source.load()?;
    let queries = a.workload.queries(&g, &idx, a.search.k())?;
    let engines = if a.algo.is_empty() { Engine::ALL.to_vec() } else { a.algo.clone() };
    let report =
        run_bench(&g, &idx, &queries, &engines, &cfg, &a.sampling.config(), a.parallel).map_err(search_failure)?;
    if let Some(p) = &a.records {
        fs::write(p, report.records_csv()).with_context(|| format!("cannot write {}", p.display()))?;
    }
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Format::Csv => report.summary_csv(),
        Format::Text => summary_text(&report.summary),
    };
    write_output(a.out.as_deref(), &text)
}

fn summary_text(rows: &[kgp_core::harness::BucketSummary]) -> String {
    let mut out = format!(
        "{:<9} {:>12} {:<13} {:>7} {:>12} {:>12} {:>12}\n",
        "grouping", "bucket", "algorithm", "queries", "min_s", "geomean_s", "max_s"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<9} {:>12} {:<13} {:>7} {:>12.6} {:>12.6} {:>12.6}\n",
            r.grouping,
            r.bucket,
            r.algorithm.name(),
            r.queries,
            r.min_seconds,
            r.geomean_seconds,
            r.max_seconds
        ));
    }
    out
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    for &rho in &a.rhos {
        check_rate(rho)?;
    }
    let cfg = a.search.scoring()?;
    let (g, idx) = a.source.load()?;
    let queries = a.workload.queries(&g, &idx, a.search.k())?;
    let lambdas: Vec<Option<u64>> = a.lambdas.iter().map(|l| l.0).collect();
    let seeds: Vec<u64> = (0..a.seeds).collect();
    let report = run_precision_sweep(&idx, &queries, &lambdas, &a.rhos, &seeds, &cfg).map_err(search_failure)?;
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&report.precision).expect("report serializes") + "\n",
        Format::Csv => report.precision_csv(),
        Format::Text => {
            let mut out = String::new();
            for r in &report.precision {
                let lambda = r.lambda.map_or("inf".to_owned(), |l| l.to_string());
                out.push_str(&format!(
                    "{}\tlambda={lambda}\trho={}\tseed={}\tprecision={:.4}\n",
                    r.query, r.rho, r.seed, r.precision
                ));
            }
            out
        }
    };
    write_output(a.out.as_deref(), &text)
}

#[derive(Serialize)]
struct OraclePattern {
    paths: Vec<String>,
    count: usize,
}

fn cmd_oracle(a: &OracleArgs) -> Result<()> {
    let g = a.graph.load()?;
    let q = Query::parse(&a.q, 1, g.tokenizer()).map_err(usage)?;
    let pr = compute_pagerank(&g, DEFAULT_DAMPING, DEFAULT_TOLERANCE);
    let groups = brute_force_patterns(&g, &pr, &q, a.d as usize);
    let (types, attrs) = (g.type_names(), g.attr_names());
    let patterns: Vec<OraclePattern> = groups
        .iter()
        .map(|(p, members)| OraclePattern { paths: p.display(&types, &attrs), count: members.len() })
        .collect();
    let text = match (a.count, a.format) {
        (true, Format::Json) => format!("{{\"count\": {}}}\n", patterns.len()),
        (true, _) => format!("{}\n", patterns.len()),
        (false, Format::Json) => serde_json::to_string_pretty(&patterns).expect("patterns serialize") + "\n",
        (false, Format::Csv) => {
            let mut out = String::from("pattern,subtrees\n");
            for p in &patterns {
                out.push_str(&format!("\"{}\",{}\n", p.paths.join(" ").replace('"', "\"\""), p.count));
            }
            out
        }
        (false, Format::Text) => {
            let mut out = String::new();
            for p in &patterns {
                out.push_str(&format!("{}\t{}\n", p.count, p.paths.join(" ")));
            }
            out
        }
    };
    write_output(a.out.as_deref(), &text)
}

#[derive(Serialize)]
struct DumpWord<'a> {
    word: &'a str,
    patterns: Vec<DumpPattern<'a>>,
}

#[derive(Serialize)]
struct DumpPattern<'a> {
    pattern: String,
    roots: Vec<DumpRoot<'a>>,
}

#[derive(Serialize)]
struct DumpRoot<'a> {
    root: u32,
    paths: &'a [kgp_core::IndexedPath],
}

fn cmd_dump(a: &DumpArgs) -> Result<()> {
    let idx = load_index(&a.index)?;
    if let Some(w) = &a.word {
        if idx.block(w).is_none() {
            return Err(Failure::Data(anyhow!("word `{w}` is not indexed")));
        }
    }
    let words: Vec<DumpWord<'_>> = idx
        .blocks()
        .filter(|(w, _)| a.word.as_deref().is_none_or(|x| x == *w))
        .map(|(word, block)| DumpWord {
            word,
            patterns: block
                .patterns()
                .iter()
                .enumerate()
                .map(|(pid, p)| DumpPattern {
                    pattern: p.display(idx.type_names(), idx.attr_names()),
                    roots: block
                        .roots_of_pattern(pid as u32)
                        .iter()
                        .map(|&(root, span)| DumpRoot { root: root.0, paths: block.pf_slice(span) })
                        .collect(),
                })
                .collect(),
        })
        .collect();
    let doc = serde_json::json!({
        "d": idx.d(),
        "entities": idx.entity_count(),
        "types": idx.type_names(),
        "attrs": idx.attr_names(),
        "stats": idx.stats(),
        "words": words,
    });
    write_output(a.out.as_deref(), &(serde_json::to_string_pretty(&doc).expect("dump serializes") + "\n"))
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("KGP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(anyhow!("KGP_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Data(anyhow!("cannot start thread pool: {e}")))
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Build(a) => cmd_build(a),
        Command::Query(a) => cmd_query(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::DumpIndex(a) => cmd_dump(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
