//! Small graphs used in examples, tests and benchmarks.

use crate::graph::{load_graph, GraphBuilder, KnowledgeGraph};

/// Graph file source.
pub const TOY_GRAPH: &str = include_str!("../data/toy.kg");

/// Four-keyword query whose best pattern joins software, genre, developer and revenue.
pub const TOY_QUERY: &str = "database software company revenue";

/// Height threshold the toy examples are worked at.
pub const TOY_D: usize = 3;

pub fn toy_graph() -> KnowledgeGraph {
    load_graph(TOY_GRAPH.as_bytes()).expect("toy graph parses")
}

/// `a` roots of type `R` reach an `alpha` entity over attribute `via_a`,
/// `b` more reach one over `via_b`. For the query `alpha` at height 2 the two
/// `R`-rooted patterns have `a` and `b` members of equal score.
pub fn two_pattern_graph(a: usize, b: usize) -> KnowledgeGraph {
    let mut g = GraphBuilder::default();
    for (i, attr, target_type) in (0..a).map(|i| (i, "via_a", "X")).chain((a..a + b).map(|i| (i, "via_b", "Y"))) {
        let r = g.entity(&format!("r{i}"), "R", "").expect("fresh key");
        let t = g.entity(&format!("t{i}"), target_type, "alpha").expect("fresh key");
        g.edge(r, attr, t);
    }
    g.finish()
}

/// One `Hub` root per pair `(i, j)`: keyword `left` is reachable only over
/// attribute `l{i}` and `right` only over `r{j}`, each from its own hub, so
/// the two keywords never share a root. Each keyword has `p` patterns.
pub fn disjoint_patterns_graph(p: usize) -> KnowledgeGraph {
    let mut g = GraphBuilder::default();
    for i in 0..p {
        for (side, word) in [("l", "left"), ("r", "right")] {
            let hub = g.entity(&format!("{side}hub{i}"), "Hub", "").expect("fresh key");
            let leaf = g.entity(&format!("{side}leaf{i}"), "Leaf", word).expect("fresh key");
            g.edge(hub, &format!("{side}{i}"), leaf);
        }
    }
    g.finish()
}
