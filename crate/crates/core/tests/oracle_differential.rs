mod common;

use common::{random_case, Case};
use kgp_core::harness::{run_query, Engine};
use kgp_core::{
    brute_force_patterns, build_indexes, compute_pagerank, search_linear_enum, PathIndex, Query, SamplingConfig,
    ScoringConfig,
};

const CASES: u64 = 150;

fn index(c: &Case) -> PathIndex {
    build_indexes(&c.graph, &compute_pagerank(&c.graph, 0.85, 1e-8), c.d)
}

fn with_k(q: &Query, k: usize) -> Query {
    Query::new(q.keywords().iter().cloned(), k).unwrap()
}

#[test]
fn full_enumeration_matches_brute_force() {
    let mut rich = 0;
    for seed in 0..CASES {
        let c = random_case(seed, 10);
        let idx = index(&c);
        let truth = brute_force_patterns(&c.graph, idx.pagerank(), &c.query, c.d);
        let got = search_linear_enum(&idx, &c.query);
        assert_eq!(got.groups, truth, "seed {seed}");
        let members: usize = truth.iter().map(|(_, ts)| ts.len()).sum();
        assert_eq!(got.stats.accepted as usize, members, "seed {seed}");
        if truth.len() >= 3 && got.stats.rejected > 0 {
            rich += 1;
        }
    }
    // enough cases with several patterns and non-tree tuples to mean something
    assert!(rich >= 10, "only {rich} rich cases");
}

#[test]
fn engines_agree_on_top_k() {
    let cfg = ScoringConfig::default();
    for seed in 0..CASES {
        let c = random_case(seed, 1);
        let idx = index(&c);
        let all = brute_force_patterns(&c.graph, idx.pagerank(), &c.query, c.d);
        for k in [1, 5, 100] {
            let q = with_k(&c.query, k);
            let reference = run_query(Engine::Linear, &c.graph, &idx, &q, &cfg, &SamplingConfig::exact()).unwrap();
            assert_eq!(reference.patterns.len(), k.min(all.len()), "seed {seed} k {k}");
            for engine in [Engine::Baseline, Engine::PatternEnum, Engine::LinearTopk] {
                let out = run_query(engine, &c.graph, &idx, &q, &cfg, &SamplingConfig::exact()).unwrap();
                assert_eq!(out.patterns, reference.patterns, "seed {seed} k {k} {engine}");
            }
        }
    }
}

#[test]
fn smaller_k_is_a_prefix() {
    let cfg = ScoringConfig::default();
    for seed in 0..CASES {
        let c = random_case(seed, 100);
        let idx = index(&c);
        let sampling = SamplingConfig::exact();
        let full = run_query(Engine::LinearTopk, &c.graph, &idx, &c.query, &cfg, &sampling).unwrap().patterns;
        for k in [1, 2, 5] {
            let q = with_k(&c.query, k);
            let part = run_query(Engine::LinearTopk, &c.graph, &idx, &q, &cfg, &sampling).unwrap().patterns;
            assert_eq!(part.as_slice(), &full[..k.min(full.len())], "seed {seed} k {k}");
        }
        for w in full.windows(2) {
            assert!(w[0].score > w[1].score || (w[0].score == w[1].score && w[0].pattern < w[1].pattern));
        }
    }
}

#[test]
fn accepted_subtrees_bounded_by_path_products() {
    for seed in 0..CASES {
        let c = random_case(seed, 5);
        let idx = index(&c);
        let stats = search_linear_enum(&idx, &c.query).stats;
        let mut accepted = 0;
        for t in &stats.per_type {
            assert!(t.accepted <= t.upper_bound, "seed {seed}");
            assert_eq!(t.accepted + t.rejected, t.upper_bound, "seed {seed}");
            accepted += t.accepted;
        }
        assert_eq!(accepted, stats.accepted);
    }
}

#[test]
fn patterns_respect_height_and_tree_shape() {
    for seed in 0..CASES {
        let c = random_case(seed, 5);
        let idx = index(&c);
        for (pattern, members) in search_linear_enum(&idx, &c.query).groups {
            assert!(pattern.height() <= c.d, "seed {seed}");
            assert_eq!(pattern.paths.len(), c.query.len());
            for t in &members {
                assert_eq!(t.edges().len() + 1, t.nodes().len(), "seed {seed}");
                for (p, want) in t.paths.iter().zip(&pattern.paths) {
                    assert_eq!(p.pattern(&c.graph), *want);
                    assert!(p.node_count() <= c.d);
                }
            }
        }
    }
}

#[test]
fn repeated_runs_are_identical() {
    let cfg = ScoringConfig::default();
    let sampling = SamplingConfig { lambda: Some(0), rho: 0.5, seed: 3 };
    for seed in 0..40 {
        let c = random_case(seed, 5);
        let idx = index(&c);
        for engine in Engine::ALL {
            let a = run_query(engine, &c.graph, &idx, &c.query, &cfg, &sampling).unwrap();
            let b = run_query(engine, &c.graph, &idx, &c.query, &cfg, &sampling).unwrap();
            assert_eq!(a, b, "seed {seed} {engine}");
        }
    }
}
