#![allow(dead_code)]

use kgp_core::gen::{generate_graph, GenConfig};
use kgp_core::index::PatternElem;
use kgp_core::{load_graph, KnowledgeGraph, PathPattern, Query};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Builds a pattern from alternating type and attribute names.
pub fn pattern(g: &KnowledgeGraph, names: &[&str]) -> PathPattern {
    let elems = names.iter().enumerate().map(|(i, n)| {
        if i % 2 == 0 {
            PatternElem::Node(g.lookup_type(n).unwrap_or_else(|| panic!("type {n}")))
        } else {
            PatternElem::Attr(g.lookup_attr(n).unwrap_or_else(|| panic!("attr {n}")))
        }
    });
    PathPattern::new(elems).unwrap()
}

/// A small random graph and a random query over its vocabulary.
pub struct Case {
    pub graph: KnowledgeGraph,
    pub query: Query,
    pub d: usize,
    pub seed: u64,
}

pub fn random_case(seed: u64, k: usize) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let vocabulary = rng.random_range(6..=12);
    let cfg = GenConfig {
        entities: rng.random_range(5..=40),
        types: rng.random_range(1..=4),
        attrs: rng.random_range(1..=4),
        avg_out_degree: rng.random_range(0.5..2.0),
        vocabulary,
        words_per_text: rng.random_range(1..=2),
        zipf_exponent: 0.8,
        literal_fraction: 0.15,
        seed,
    };
    let graph = load_graph(generate_graph(&cfg).as_bytes()).unwrap();
    let m = rng.random_range(1..=4);
    let words: Vec<String> = (1..=vocabulary).map(|i| format!("w{i}")).collect();
    let picked: Vec<String> = words.choose_multiple(&mut rng, m).cloned().collect();
    let query = Query::new(picked, k).unwrap();
    let d = if rng.random_bool(0.5) { 2 } else { 3 };
    Case { graph, query, d, seed }
}
