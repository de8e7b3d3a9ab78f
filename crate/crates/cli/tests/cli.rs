use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const TOY: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/toy.kg");
const TOY_QUERY: &str = "database software company revenue";

fn kgp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgp")).args(args).output().expect("binary runs")
}

fn kgp_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgp")).args(args).env("KGP_THREADS", threads).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn toy_index(dir: &Path) -> PathBuf {
    let out = dir.join("toy.idx");
    stdout(&kgp(&["build", "--graph", TOY, "--d", "3", "--out", p(&out)]));
    out
}

#[test]
fn query_json_lists_the_two_software_rows_first() {
    let dir = tempfile::tempdir().unwrap();
    let idx = toy_index(dir.path());
    let out =
        stdout(&kgp(&["query", "--graph", TOY, "--index", p(&idx), "--q", TOY_QUERY, "--k", "2", "--format", "json"]));
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["algorithm"], "linear-topk");
    assert_eq!(doc["params"]["lambda"], serde_json::Value::Null);
    let first = &doc["patterns"][0];
    assert_eq!(first["count"], 2);
    assert_eq!(first["rows"][0][0], "SQL Server");
    assert_eq!(first["rows"][1][0], "Oracle DB");
    assert_eq!(first["rows"][0][3], "US$ 77 billion");
    assert_eq!(doc["patterns"].as_array().unwrap().len(), 2);
}

#[test]
fn every_engine_prints_the_same_patterns() {
    let outputs: Vec<serde_json::Value> = ["baseline", "pattern-enum", "linear", "linear-topk"]
        .iter()
        .map(|algo| {
            let o = stdout(&kgp(&[
                "query", "--graph", TOY, "--d", "3", "--q", TOY_QUERY, "--k", "5", "--algo", algo, "--format", "json",
            ]));
            serde_json::from_str(&o).unwrap()
        })
        .collect();
    for o in &outputs[1..] {
        assert_eq!(o["patterns"], outputs[0]["patterns"]);
    }
}

#[test]
fn csv_and_text_formats() {
    let csv = stdout(&kgp(&["query", "--graph", TOY, "--q", TOY_QUERY, "--k", "1", "--format", "csv"]));
    assert!(csv.starts_with("# rank 1 score "));
    assert!(csv.contains("SQL Server,Relational database,Microsoft,US$ 77 billion"));
    let text = stdout(&kgp(&["query", "--graph", TOY, "--q", "nothingmatches", "--k", "1"]));
    assert_eq!(text, "no tree patterns found\n");
}

#[test]
fn output_is_identical_across_thread_counts() {
    let args = [
        "query", "--graph", TOY, "--d", "3", "--q", TOY_QUERY, "--k", "3", "--lambda", "0", "--rho", "0.5", "--seed",
        "7", "--format", "json",
    ];
    let one = stdout(&kgp_env(&args, "1"));
    let four = stdout(&kgp_env(&args, "4"));
    assert_eq!(one, four);
    assert!(one.contains("\"estimated_score\""));
}

#[test]
fn exit_codes() {
    // usage errors
    assert_eq!(kgp(&[]).status.code(), Some(1));
    assert_eq!(kgp(&["query", "--graph", TOY]).status.code(), Some(1));
    assert_eq!(kgp(&["query", "--graph", TOY, "--q", "x", "--k", "0"]).status.code(), Some(1));
    assert_eq!(kgp(&["query", "--graph", TOY, "--q", "x", "--rho", "0"]).status.code(), Some(1));
    assert_eq!(kgp(&["query", "--graph", TOY, "--q", "x", "--algo", "fastest"]).status.code(), Some(1));
    assert_eq!(kgp(&["query", "--graph", TOY, "--q", " ,; "]).status.code(), Some(1));
    assert_eq!(kgp_env(&["query", "--graph", TOY, "--q", "x"], "zero").status.code(), Some(1));
    assert_eq!(kgp(&["--help"]).status.code(), Some(0));

    // data errors
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(kgp(&["query", "--graph", "/no/such/file", "--q", "x"]).status.code(), Some(2));
    let bad_graph = dir.path().join("bad.kg");
    std::fs::write(&bad_graph, "E a T x\nA a r @missing\n").unwrap();
    assert_eq!(kgp(&["query", "--graph", p(&bad_graph), "--q", "x"]).status.code(), Some(2));
    let bad_index = dir.path().join("bad.idx");
    std::fs::write(&bad_index, b"not an index").unwrap();
    assert_eq!(kgp(&["query", "--graph", TOY, "--index", p(&bad_index), "--q", "x"]).status.code(), Some(2));
    assert_eq!(kgp(&["dump-index", "--index", p(&bad_index)]).status.code(), Some(2));
}

#[test]
fn index_must_belong_to_the_graph() {
    let dir = tempfile::tempdir().unwrap();
    let idx = toy_index(dir.path());
    let other = dir.path().join("other.kg");
    stdout(&kgp(&["gen", "--entities", "30", "--out", p(&other)]));
    assert_eq!(kgp(&["query", "--graph", p(&other), "--index", p(&idx), "--q", "w1"]).status.code(), Some(2));
    assert_eq!(kgp(&["query", "--graph", TOY, "--index", p(&idx), "--d", "2", "--q", "x"]).status.code(), Some(1));
}

#[test]
fn scoring_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("score.toml");
    std::fs::write(&cfg, "aggregator = \"count\"\nz1 = -2\n").unwrap();
    let o =
        stdout(&kgp(&["query", "--graph", TOY, "--q", TOY_QUERY, "--k", "1", "--config", p(&cfg), "--format", "json"]));
    let doc: serde_json::Value = serde_json::from_str(&o).unwrap();
    assert_eq!(doc["params"]["scoring"]["aggregator"], "count");
    assert_eq!(doc["patterns"][0]["score"], 2.0);

    std::fs::write(&cfg, "weights = 3\n").unwrap();
    assert_eq!(kgp(&["query", "--graph", TOY, "--q", "x", "--config", p(&cfg)]).status.code(), Some(2));
    // sampling needs the sum aggregator
    std::fs::write(&cfg, "aggregator = \"max\"\n").unwrap();
    let o = kgp(&["query", "--graph", TOY, "--q", TOY_QUERY, "--config", p(&cfg), "--lambda", "0", "--rho", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn synonyms_map_query_words() {
    let dir = tempfile::tempdir().unwrap();
    let syn = dir.path().join("syn.txt");
    std::fs::write(&syn, "# word canonical\nfirm company\n").unwrap();
    let o = stdout(&kgp(&[
        "query",
        "--graph",
        TOY,
        "--synonyms",
        p(&syn),
        "--q",
        "database software firm revenue",
        "--k",
        "1",
        "--format",
        "json",
    ]));
    let doc: serde_json::Value = serde_json::from_str(&o).unwrap();
    assert_eq!(doc["query"]["keywords"], serde_json::json!(["database", "software", "company", "revenue"]));
    assert_eq!(doc["patterns"][0]["count"], 2);
}

#[test]
fn gen_is_deterministic_and_loadable() {
    let a = stdout(&kgp(&["gen", "--entities", "100", "--seed", "4"]));
    let b = stdout(&kgp(&["gen", "--entities", "100", "--seed", "4"]));
    assert_eq!(a, b);
    assert_eq!(a.lines().filter(|l| l.starts_with("E ")).count(), 100);
    assert_eq!(kgp(&["gen", "--entities", "0"]).status.code(), Some(1));
}

#[test]
fn oracle_matches_query_pattern_count() {
    let count = stdout(&kgp(&["oracle", "--graph", TOY, "--q", TOY_QUERY, "--d", "3", "--count"]));
    let listed = stdout(&kgp(&["oracle", "--graph", TOY, "--q", TOY_QUERY, "--d", "3"]));
    assert_eq!(count.trim().parse::<usize>().unwrap(), listed.lines().count());
    let o = stdout(&kgp(&["query", "--graph", TOY, "--d", "3", "--q", TOY_QUERY, "--k", "1000", "--format", "json"]));
    let doc: serde_json::Value = serde_json::from_str(&o).unwrap();
    assert_eq!(doc["patterns"].as_array().unwrap().len(), listed.lines().count());
}

#[test]
fn dump_index_shows_word_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let idx = toy_index(dir.path());
    let o = stdout(&kgp(&["dump-index", "--index", p(&idx), "--word", "database"]));
    let doc: serde_json::Value = serde_json::from_str(&o).unwrap();
    assert_eq!(doc["d"], 3);
    let words = doc["words"].as_array().unwrap();
    assert_eq!(words.len(), 1);
    let patterns: Vec<&str> =
        words[0]["patterns"].as_array().unwrap().iter().map(|p| p["pattern"].as_str().unwrap()).collect();
    assert!(patterns.contains(&"(Software)(Reference)(Book)"));
    assert_eq!(kgp(&["dump-index", "--index", p(&idx), "--word", "zebra"]).status.code(), Some(2));
}

#[test]
fn bench_and_sweep_reports() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.kg");
    stdout(&kgp(&["gen", "--entities", "200", "--seed", "2", "--out", p(&g)]));
    let records = dir.path().join("records.csv");
    let summary = stdout(&kgp(&[
        "bench",
        "--graph",
        p(&g),
        "--d",
        "2",
        "--random-queries",
        "4",
        "--records",
        p(&records),
        "--parallel",
    ]));
    assert!(summary.starts_with("grouping,bucket,algorithm,queries,min_seconds,geomean_seconds,max_seconds"));
    let rec = std::fs::read_to_string(&records).unwrap();
    assert_eq!(rec.lines().count(), 1 + 4 * 4);

    let queries = dir.path().join("q.txt");
    std::fs::write(&queries, "# two queries\nw1 w2\nw3\n").unwrap();
    let sweep = stdout(&kgp(&[
        "sweep",
        "--graph",
        p(&g),
        "--d",
        "2",
        "--queries",
        p(&queries),
        "--lambdas",
        "inf,0",
        "--rhos",
        "1,0.5",
        "--seeds",
        "3",
        "--format",
        "json",
    ]));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&sweep).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 2 * 3);
    for r in &rows {
        let precision = r["precision"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&precision));
        if r["lambda"].is_null() || r["rho"] == 1.0 {
            assert_eq!(precision, 1.0);
        }
    }
}
