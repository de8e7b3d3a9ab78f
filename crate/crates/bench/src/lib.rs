//! Workloads shared by the engine benchmarks.

use kgp_core::gen::{generate_graph, GenConfig};
use kgp_core::harness::random_queries;
use kgp_core::{build_indexes, compute_pagerank, load_graph, KnowledgeGraph, PathIndex, Query};

pub struct Workload {
    pub graph: KnowledgeGraph,
    pub index: PathIndex,
    pub queries: Vec<Query>,
}

/// Synthetic graph of `entities` entities indexed at height `d`, with
/// `queries` random queries of `words` keywords drawn from the 30 most
/// frequent index words.
pub fn synthetic(entities: usize, d: usize, queries: usize, words: usize, k: usize) -> Workload {
    let graph = synthetic_graph(entities, 1);
    let index = build_indexes(&graph, &compute_pagerank(&graph, 0.85, 1e-8), d);
    let queries = random_queries(&index, queries, words, k, 30, 7);
    Workload { graph, index, queries }
}

pub fn synthetic_graph(entities: usize, seed: u64) -> KnowledgeGraph {
    let cfg = GenConfig { entities, seed, ..Default::default() };
    load_graph(generate_graph(&cfg).as_bytes()).expect("generated graph loads")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workload_is_reproducible() {
        let a = synthetic(200, 2, 5, 2, 3);
        let b = synthetic(200, 2, 5, 2, 3);
        assert_eq!(a.queries.len(), 5);
        assert_eq!(a.queries, b.queries);
        assert_eq!(a.index, b.index);
    }
}
