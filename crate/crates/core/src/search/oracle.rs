use std::collections::{BTreeMap, BTreeSet};

use super::{Query, TreePattern, ValidSubtree};
use crate::graph::{AttrTypeId, EntityId, KnowledgeGraph, PageRankVector};
use crate::index::{IndexedPath, MatchLocus, PathPattern, PatternElem};

fn contains(set: &[String], w: &str) -> bool {
    set.iter().any(|t| t == w)
}

fn pattern_of(g: &KnowledgeGraph, path: &IndexedPath) -> PathPattern {
    let mut elems = vec![PatternElem::Node(g.entity(path.nodes[0]).ty)];
    for (i, &a) in path.attrs.iter().enumerate() {
        elems.push(PatternElem::Attr(a));
        let last = i + 2 == path.nodes.len();
        if !(last && path.locus == MatchLocus::EdgeType) {
            elems.push(PatternElem::Node(g.entity(path.nodes[i + 1]).ty));
        }
    }
    PathPattern::new(elems).expect("alternating by construction")
}

/// Tree iff the union of paths has exactly one edge fewer than it has nodes.
fn union_is_tree(paths: &[&IndexedPath]) -> bool {
    let mut nodes: BTreeSet<EntityId> = BTreeSet::new();
    let mut edges: BTreeSet<(EntityId, AttrTypeId, EntityId)> = BTreeSet::new();
    for p in paths {
        nodes.extend(p.nodes.iter().copied());
        for i in 0..p.attrs.len() {
            edges.insert((p.nodes[i], p.attrs[i], p.nodes[i + 1]));
        }
    }
    edges.len() + 1 == nodes.len()
}

struct Dfs<'a> {
    g: &'a KnowledgeGraph,
    pr: &'a PageRankVector,
    words: &'a [String],
    d: usize,
    /// per keyword, the paths from the current root
    hits: Vec<Vec<IndexedPath>>,
}

impl Dfs<'_> {
    fn visit(&mut self, nodes: &mut Vec<EntityId>, attrs: &mut Vec<AttrTypeId>) {
        let tip = *nodes.last().unwrap();
        let e = self.g.entity(tip);
        let type_tokens = &self.g.type_label(e.ty).token_set;
        for (i, w) in self.words.iter().enumerate() {
            let in_text = contains(&e.token_set, w);
            let in_type = contains(type_tokens, w);
            if in_text || in_type {
                let sim_text = if in_text { 1.0 / e.token_set.len() as f64 } else { 0.0 };
                let sim_type = if in_type { 1.0 / type_tokens.len() as f64 } else { 0.0 };
                self.hits[i].push(IndexedPath {
                    nodes: nodes.iter().copied().collect(),
                    attrs: attrs.iter().copied().collect(),
                    locus: if in_text { MatchLocus::NodeText } else { MatchLocus::NodeType },
                    pr_term: self.pr.get(tip),
                    sim_term: sim_text.max(sim_type),
                });
            }
            if let Some(&a) = attrs.last() {
                let attr_tokens = &self.g.attr_label(a).token_set;
                if contains(attr_tokens, w) {
                    self.hits[i].push(IndexedPath {
                        nodes: nodes.iter().copied().collect(),
                        attrs: attrs.iter().copied().collect(),
                        locus: MatchLocus::EdgeType,
                        pr_term: self.pr.get(nodes[nodes.len() - 2]),
                        sim_term: 1.0 / attr_tokens.len() as f64,
                    });
                }
            }
        }
        if nodes.len() == self.d {
            return;
        }
        for &ei in self.g.out_edges(tip) {
            let edge = self.g.edge(ei);
            if nodes.contains(&edge.target) {
                continue;
            }
            nodes.push(edge.target);
            attrs.push(edge.attr);
            self.visit(nodes, attrs);
            nodes.pop();
            attrs.pop();
        }
    }
}

fn pick<'a>(lists: &'a [Vec<IndexedPath>], at: &[usize]) -> Vec<&'a IndexedPath> {
    lists.iter().zip(at).map(|(l, &j)| &l[j]).collect()
}

/// Exhaustive ground truth for small graphs: every root, every simple path of
/// at most `d` nodes, every keyword tuple whose union is a tree. Groups are in
/// pattern order, members in (root, paths) order.
pub fn brute_force_patterns(
    g: &KnowledgeGraph,
    pr: &PageRankVector,
    q: &Query,
    d: usize,
) -> Vec<(TreePattern, Vec<ValidSubtree>)> {
    let words = q.keywords();
    let mut groups: BTreeMap<TreePattern, Vec<ValidSubtree>> = BTreeMap::new();
    for (root, _) in g.entities() {
        let mut dfs = Dfs { g, pr, words, d, hits: vec![Vec::new(); words.len()] };
        dfs.visit(&mut vec![root], &mut Vec::new());
        let mut lists = dfs.hits;
        if lists.iter().any(Vec::is_empty) {
            continue;
        }
        for l in &mut lists {
            l.sort_by(IndexedPath::canonical_cmp);
        }
        // odometer over the per-keyword lists
        let mut at = vec![0usize; lists.len()];
        'tuples: loop {
            let paths = pick(&lists, &at);
            if union_is_tree(&paths) {
                let pattern = TreePattern::new(paths.iter().map(|p| pattern_of(g, p)).collect());
                groups
                    .entry(pattern)
                    .or_default()
                    .push(ValidSubtree { root, paths: paths.into_iter().cloned().collect() });
            }
            for i in (0..at.len()).rev() {
                at[i] += 1;
                if at[i] < lists[i].len() {
                    continue 'tuples;
                }
                at[i] = 0;
            }
            break;
        }
    }
    groups.into_iter().collect()
}

/// Number of distinct non-empty tree patterns, by exhaustive search.
pub fn brute_force_count(g: &KnowledgeGraph, q: &Query, d: usize) -> usize {
    let pr = PageRankVector::uniform(g.entity_count(), 1.0);
    brute_force_patterns(g, &pr, q, d).len()
}
