//! Path-pattern inverted index.
//!
//! For every keyword token the index holds all simple paths of at most `d`
//! nodes that start at some root and end at a node or edge containing the
//! token. The same path set is stored twice, in two sorted contiguous runs:
//!
//! * pattern-first: pattern → root → paths
//! * root-first: root → pattern → paths
//!
//! with offset tables over each run. Patterns inside a word block are kept in
//! canonical order and addressed by their position ("pattern id"), so
//! comparing pattern ids of the same word compares the patterns themselves.

mod codec;
mod pattern;

use std::cmp::Ordering;

use rayon::prelude::*;
use smallvec::SmallVec;

use crate::graph::{AttrTypeId, EntityId, EntityTypeId, KnowledgeGraph, PageRankVector};
use crate::text::jaccard_sorted;

pub use codec::{deserialize, serialize, FORMAT_VERSION, MAGIC};
pub(crate) use pattern::display_elems;
pub use pattern::{IndexedPath, MatchLocus, PathPattern, PatternElem};

/// Half-open `u32` range into one of a word block's runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: u32,
    pub end: u32,
}

impl Span {
    #[inline]
    pub fn range(self) -> std::ops::Range<usize> {
        self.start as usize..self.end as usize
    }

    #[inline]
    pub fn len(self) -> usize {
        (self.end - self.start) as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.end == self.start
    }
}

/// Both layouts for one word.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WordBlock {
    /// Distinct patterns in canonical order; position is the pattern id.
    pub(crate) patterns: Vec<PathPattern>,
    /// Per pattern id: span of `pf_roots`.
    pub(crate) pattern_roots: Vec<Span>,
    /// `(root, span of pf_paths)`, sorted by pattern then root.
    pub(crate) pf_roots: Vec<(EntityId, Span)>,
    pub(crate) pf_paths: Vec<IndexedPath>,
    /// `(root, span of rf_patterns)`, sorted by root.
    pub(crate) roots: Vec<(EntityId, Span)>,
    /// `(pattern id, span of rf_paths)`, sorted by root then pattern.
    pub(crate) rf_patterns: Vec<(u32, Span)>,
    pub(crate) rf_paths: Vec<IndexedPath>,
}

impl WordBlock {
    /// Number of indexed paths (one layout).
    pub fn len(&self) -> usize {
        self.pf_paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pf_paths.is_empty()
    }

    pub fn patterns(&self) -> &[PathPattern] {
        &self.patterns
    }

    pub fn pattern(&self, id: u32) -> &PathPattern {
        &self.patterns[id as usize]
    }

    pub fn pattern_id(&self, p: &PathPattern) -> Option<u32> {
        self.patterns.binary_search(p).ok().map(|i| i as u32)
    }

    /// Pattern-first: `(root, paths)` runs for one pattern, ascending root.
    pub fn roots_of_pattern(&self, pid: u32) -> &[(EntityId, Span)] {
        &self.pf_roots[self.pattern_roots[pid as usize].range()]
    }

    /// Pattern-first: `paths(w, P, r)`.
    pub fn paths_by_pattern(&self, pid: u32, root: EntityId) -> &[IndexedPath] {
        let runs = self.roots_of_pattern(pid);
        match runs.binary_search_by_key(&root, |&(r, _)| r) {
            Ok(i) => &self.pf_paths[runs[i].1.range()],
            Err(_) => &[],
        }
    }

    /// Pattern-first path slice for a `(root, span)` entry of [`Self::roots_of_pattern`].
    pub fn pf_slice(&self, span: Span) -> &[IndexedPath] {
        &self.pf_paths[span.range()]
    }

    /// Root-first: all `(root, pattern runs)`, ascending root.
    pub fn root_entries(&self) -> &[(EntityId, Span)] {
        &self.roots
    }

    fn root_span(&self, root: EntityId) -> Option<Span> {
        self.roots.binary_search_by_key(&root, |&(r, _)| r).ok().map(|i| self.roots[i].1)
    }

    /// Root-first: `(pattern id, paths)` runs under `root`, ascending pattern.
    pub fn patterns_at_root(&self, root: EntityId) -> &[(u32, Span)] {
        match self.root_span(root) {
            Some(s) => &self.rf_patterns[s.range()],
            None => &[],
        }
    }

    /// Root-first path slice for a `(pattern id, span)` entry.
    pub fn rf_slice(&self, span: Span) -> &[IndexedPath] {
        &self.rf_paths[span.range()]
    }

    /// Root-first: `paths(w, r, P)`.
    pub fn paths_by_root(&self, root: EntityId, pid: u32) -> &[IndexedPath] {
        let runs = self.patterns_at_root(root);
        match runs.binary_search_by_key(&pid, |&(p, _)| p) {
            Ok(i) => &self.rf_paths[runs[i].1.range()],
            Err(_) => &[],
        }
    }

    /// Root-first: `paths(w, r)`; the pattern runs of one root are adjacent.
    pub fn paths_at_root(&self, root: EntityId) -> &[IndexedPath] {
        let runs = self.patterns_at_root(root);
        match (runs.first(), runs.last()) {
            (Some(first), Some(last)) => &self.rf_paths[first.1.start as usize..last.1.end as usize],
            _ => &[],
        }
    }

    /// Number of paths under `root`, i.e. `|paths(w, r)|`.
    pub fn path_count_at_root(&self, root: EntityId) -> usize {
        self.paths_at_root(root).len()
    }

    pub fn pf_paths(&self) -> &[IndexedPath] {
        &self.pf_paths
    }

    pub fn rf_paths(&self) -> &[IndexedPath] {
        &self.rf_paths
    }
}

/// Size figures for one built index.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct IndexStats {
    pub d: u32,
    pub words: usize,
    /// Indexed paths in one layout.
    pub entries: usize,
    /// `Σ_p |p|·|text(p)|`: node counts summed over every (path, word) entry.
    pub text_weight: usize,
    /// Per-word path count `S_i`, in word order.
    pub per_word: Vec<(String, usize)>,
}

/// The built index plus the graph-side metadata needed to query and render it.
#[derive(Debug, Clone, PartialEq)]
pub struct PathIndex {
    pub(crate) d: u32,
    pub(crate) type_names: Vec<String>,
    pub(crate) attr_names: Vec<String>,
    pub(crate) entity_types: Vec<EntityTypeId>,
    pub(crate) pagerank: PageRankVector,
    pub(crate) words: Vec<String>,
    pub(crate) blocks: Vec<WordBlock>,
}

impl PathIndex {
    pub fn d(&self) -> usize {
        self.d as usize
    }

    pub fn pagerank(&self) -> &PageRankVector {
        &self.pagerank
    }

    pub fn type_names(&self) -> &[String] {
        &self.type_names
    }

    pub fn attr_names(&self) -> &[String] {
        &self.attr_names
    }

    pub fn entity_count(&self) -> usize {
        self.entity_types.len()
    }

    pub fn entity_type(&self, v: EntityId) -> EntityTypeId {
        self.entity_types[v.index()]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn block(&self, w: &str) -> Option<&WordBlock> {
        self.words.binary_search_by(|x| x.as_str().cmp(w)).ok().map(|i| &self.blocks[i])
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&str, &WordBlock)> {
        self.words.iter().map(String::as_str).zip(&self.blocks)
    }

    /// `patns(w)`: every pattern along which some root reaches `w`.
    pub fn patns(&self, w: &str) -> &[PathPattern] {
        self.block(w).map(|b| b.patterns()).unwrap_or(&[])
    }

    /// `roots(w, P)`.
    pub fn roots_with_pattern(&self, w: &str, p: &PathPattern) -> Vec<EntityId> {
        self.block(w)
            .and_then(|b| b.pattern_id(p).map(|pid| b.roots_of_pattern(pid).iter().map(|&(r, _)| r).collect()))
            .unwrap_or_default()
    }

    /// `paths(w, P, r)` via the pattern-first layout.
    pub fn paths_by_pattern(&self, w: &str, p: &PathPattern, r: EntityId) -> &[IndexedPath] {
        self.block(w).and_then(|b| b.pattern_id(p).map(|pid| b.paths_by_pattern(pid, r))).unwrap_or(&[])
    }

    /// `roots(w)`.
    pub fn roots(&self, w: &str) -> Vec<EntityId> {
        self.block(w).map(|b| b.roots.iter().map(|&(r, _)| r).collect()).unwrap_or_default()
    }

    /// `patns(w, r)`.
    pub fn patns_at_root(&self, w: &str, r: EntityId) -> Vec<&PathPattern> {
        self.block(w)
            .map(|b| b.patterns_at_root(r).iter().map(|&(pid, _)| b.pattern(pid)).collect())
            .unwrap_or_default()
    }

    /// `paths(w, r, P)` via the root-first layout.
    pub fn paths_by_root(&self, w: &str, r: EntityId, p: &PathPattern) -> &[IndexedPath] {
        self.block(w).and_then(|b| b.pattern_id(p).map(|pid| b.paths_by_root(r, pid))).unwrap_or(&[])
    }

    /// `paths(w, r)`.
    pub fn paths_at_root(&self, w: &str, r: EntityId) -> &[IndexedPath] {
        self.block(w).map(|b| b.paths_at_root(r)).unwrap_or(&[])
    }

    pub fn stats(&self) -> IndexStats {
        let per_word: Vec<(String, usize)> = self.blocks().map(|(w, b)| (w.to_owned(), b.len())).collect();
        let text_weight = self.blocks.iter().flat_map(|b| b.pf_paths.iter()).map(IndexedPath::node_count).sum();
        IndexStats {
            d: self.d,
            words: self.words.len(),
            entries: per_word.iter().map(|(_, n)| n).sum(),
            text_weight,
            per_word,
        }
    }
}

struct Entry {
    word: u32,
    pattern: PathPattern,
    path: IndexedPath,
}

/// Collects every (word, path) entry for paths starting at `root`.
fn paths_from_root(
    g: &KnowledgeGraph,
    pr: &PageRankVector,
    vocab: &[String],
    d: usize,
    root: EntityId,
    out: &mut Vec<Entry>,
) {
    let word_id = |w: &str| vocab.binary_search_by(|x| x.as_str().cmp(w)).expect("token in vocabulary") as u32;
    let mut nodes: SmallVec<[EntityId; 4]> = SmallVec::new();
    let mut attrs: SmallVec<[AttrTypeId; 3]> = SmallVec::new();
    nodes.push(root);

    // iterative DFS: one cursor into out_edges per node on the current path
    let mut cursors: SmallVec<[usize; 4]> = SmallVec::new();
    cursors.push(0);
    emit(g, pr, &nodes, &attrs, &word_id, out);
    while let Some(cursor) = cursors.last_mut() {
        let tip = *nodes.last().unwrap();
        let out_edges = g.out_edges(tip);
        if nodes.len() >= d || *cursor >= out_edges.len() {
            cursors.pop();
            nodes.pop();
            attrs.pop();
            continue;
        }
        let edge = g.edge(out_edges[*cursor]);
        *cursor += 1;
        if nodes.contains(&edge.target) {
            continue;
        }
        nodes.push(edge.target);
        attrs.push(edge.attr);
        cursors.push(0);
        emit(g, pr, &nodes, &attrs, &word_id, out);
    }
}

fn emit(
    g: &KnowledgeGraph,
    pr: &PageRankVector,
    nodes: &[EntityId],
    attrs: &[AttrTypeId],
    word_id: &impl Fn(&str) -> u32,
    out: &mut Vec<Entry>,
) {
    let tip = *nodes.last().unwrap();
    let entity = g.entity(tip);
    let type_set = &g.type_label(entity.ty).token_set;
    let text_set = &entity.token_set;

    if !text_set.is_empty() || !type_set.is_empty() {
        let pattern = PathPattern::of_path(g, nodes, attrs, false);
        // merge the two sorted token sets; a token in both yields one entry
        let (mut i, mut j) = (0, 0);
        while i < text_set.len() || j < type_set.len() {
            let ord = match (text_set.get(i), type_set.get(j)) {
                (Some(a), Some(b)) => a.cmp(b),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            let (w, locus) = match ord {
                Ordering::Less => {
                    i += 1;
                    (&text_set[i - 1], MatchLocus::NodeText)
                }
                Ordering::Greater => {
                    j += 1;
                    (&type_set[j - 1], MatchLocus::NodeType)
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (&text_set[i - 1], MatchLocus::NodeText)
                }
            };
            let sim = jaccard_sorted(w, text_set).max(jaccard_sorted(w, type_set));
            out.push(Entry {
                word: word_id(w),
                pattern: pattern.clone(),
                path: IndexedPath {
                    nodes: nodes.into(),
                    attrs: attrs.into(),
                    locus,
                    pr_term: pr.get(tip),
                    sim_term: sim,
                },
            });
        }
    }

    if let Some(&last_attr) = attrs.last() {
        let attr_set = &g.attr_label(last_attr).token_set;
        if attr_set.is_empty() {
            return;
        }
        let pattern = PathPattern::of_path(g, nodes, attrs, true);
        let source = nodes[nodes.len() - 2];
        let sim = 1.0 / attr_set.len() as f64;
        for w in attr_set {
            out.push(Entry {
                word: word_id(w),
                pattern: pattern.clone(),
                path: IndexedPath {
                    nodes: nodes.into(),
                    attrs: attrs.into(),
                    locus: MatchLocus::EdgeType,
                    pr_term: pr.get(source),
                    sim_term: sim,
                },
            });
        }
    }
}

fn build_block(entries: Vec<Entry>) -> WordBlock {
    // entries arrive sorted pattern-first: (pattern, root, path)
    let mut block = WordBlock::default();
    let mut rf: Vec<(EntityId, u32, usize)> = Vec::with_capacity(entries.len());
    for e in entries {
        if block.patterns.last() != Some(&e.pattern) {
            block.patterns.push(e.pattern);
            let at = block.pf_roots.len() as u32;
            block.pattern_roots.push(Span { start: at, end: at });
        }
        let pid = (block.patterns.len() - 1) as u32;
        let root = e.path.root();
        let at = block.pf_paths.len() as u32;
        let roots_span = block.pattern_roots.last_mut().unwrap();
        let new_root = roots_span.is_empty() || block.pf_roots.last().map(|&(r, _)| r) != Some(root);
        if new_root {
            block.pf_roots.push((root, Span { start: at, end: at }));
            roots_span.end += 1;
        }
        block.pf_roots.last_mut().unwrap().1.end += 1;
        rf.push((root, pid, block.pf_paths.len()));
        block.pf_paths.push(e.path);
    }

    // root-first: stable sort by (root, pattern id) keeps path order inside a run
    rf.sort_by_key(|&(r, p, _)| (r, p));
    for (root, pid, src) in rf {
        let at = block.rf_paths.len() as u32;
        if block.roots.last().map(|&(r, _)| r) != Some(root) {
            let pat_at = block.rf_patterns.len() as u32;
            block.roots.push((root, Span { start: pat_at, end: pat_at }));
        }
        let root_span = &mut block.roots.last_mut().unwrap().1;
        let new_pattern = root_span.is_empty() || block.rf_patterns.last().map(|&(p, _)| p) != Some(pid);
        if new_pattern {
            block.rf_patterns.push((pid, Span { start: at, end: at }));
            root_span.end += 1;
        }
        block.rf_patterns.last_mut().unwrap().1.end += 1;
        block.rf_paths.push(block.pf_paths[src].clone());
    }
    block
}

/// Materializes every keyword-reaching path of at most `d` nodes.
///
/// Roots are expanded in parallel; the merge sorts entries into a total
/// order, so the result does not depend on the thread count.
///
/// # Panics
///
/// If `d == 0` or `pr` does not have one score per entity.
pub fn build_indexes(g: &KnowledgeGraph, pr: &PageRankVector, d: usize) -> PathIndex {
    assert!(d >= 1, "height threshold must be at least 1");
    assert_eq!(pr.len(), g.entity_count(), "PageRank vector does not match the graph");
    let vocab = g.vocabulary();

    let mut entries: Vec<Entry> = (0..g.entity_count() as u32)
        .into_par_iter()
        .map(|r| {
            let mut out = Vec::new();
            paths_from_root(g, pr, &vocab, d, EntityId(r), &mut out);
            out
        })
        .flatten_iter()
        .collect();
    entries.par_sort_unstable_by(|a, b| {
        a.word.cmp(&b.word).then_with(|| a.pattern.cmp(&b.pattern)).then_with(|| a.path.canonical_cmp(&b.path))
    });

    let mut words = Vec::new();
    let mut grouped: Vec<Vec<Entry>> = Vec::new();
    for e in entries {
        if words.last() != Some(&e.word) {
            words.push(e.word);
            grouped.push(Vec::new());
        }
        grouped.last_mut().unwrap().push(e);
    }
    let blocks: Vec<WordBlock> = grouped.into_par_iter().map(build_block).collect();

    PathIndex {
        d: d as u32,
        type_names: g.type_names(),
        attr_names: g.attr_names(),
        entity_types: g.entities().map(|(_, e)| e.ty).collect(),
        pagerank: pr.clone(),
        words: words.into_iter().map(|w| vocab[w as usize].clone()).collect(),
        blocks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{compute_pagerank, GraphBuilder};

    #[test]
    fn single_entity_depth_one() {
        let mut b = GraphBuilder::default();
        let v = b.entity("x", "Thing", "alpha").unwrap();
        let g = b.finish();
        let pr = compute_pagerank(&g, 0.85, 1e-8);
        let idx = build_indexes(&g, &pr, 1);
        let pats = idx.patns("alpha");
        assert_eq!(pats.len(), 1);
        assert_eq!(pats[0].elems(), &[PatternElem::Node(g.entity_type(v))]);
        let paths = idx.paths_at_root("alpha", v);
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].node_count(), 1);
        assert_eq!(paths[0].sim_term, 1.0);
        assert_eq!(paths[0].locus, MatchLocus::NodeText);
        // type text is indexed too
        assert_eq!(idx.roots("thing"), vec![v]);
        assert!(idx.patns("unknown").is_empty());
        assert!(idx.paths_by_pattern("alpha", &pats[0], EntityId(7)).is_empty());
    }

    #[test]
    fn text_and_type_match_collapse() {
        let mut b = GraphBuilder::default();
        let v = b.entity("x", "Database", "graph database").unwrap();
        let g = b.finish();
        let pr = compute_pagerank(&g, 0.85, 1e-8);
        let idx = build_indexes(&g, &pr, 2);
        let paths = idx.paths_at_root("database", v);
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].sim_term, 1.0);
        assert_eq!(paths[0].locus, MatchLocus::NodeText);
    }

    #[test]
    fn edge_match_counts_target_node() {
        let mut b = GraphBuilder::default();
        let c = b.entity("c", "Company", "Microsoft").unwrap();
        b.literal_edge(c, "Revenue", "US$ 77 billion");
        let g = b.finish();
        let pr = compute_pagerank(&g, 0.85, 1e-8);
        let idx = build_indexes(&g, &pr, 2);
        let paths = idx.paths_at_root("revenue", c);
        assert_eq!(paths.len(), 1);
        let p = &paths[0];
        assert_eq!(p.locus, MatchLocus::EdgeType);
        assert_eq!(p.node_count(), 2);
        assert_eq!(p.pr_term, pr.get(c));
        assert!(p.pattern(&g).is_edge_ending());
        // with d = 1 the edge cannot be reached
        let idx1 = build_indexes(&g, &pr, 1);
        assert!(idx1.roots("revenue").is_empty());
    }

    #[test]
    fn cycles_are_not_followed() {
        let mut b = GraphBuilder::default();
        let x = b.entity("x", "T", "alpha").unwrap();
        let y = b.entity("y", "T", "beta").unwrap();
        b.edge(x, "r", y);
        b.edge(y, "r", x);
        let g = b.finish();
        let pr = compute_pagerank(&g, 0.85, 1e-8);
        let idx = build_indexes(&g, &pr, 5);
        // x reaches alpha only at itself, never via x -> y -> x
        assert_eq!(idx.paths_at_root("alpha", x).len(), 1);
        assert_eq!(idx.paths_at_root("alpha", y).len(), 1);
        for (_, block) in idx.blocks() {
            for p in block.pf_paths() {
                let mut seen = p.nodes.to_vec();
                seen.sort();
                seen.dedup();
                assert_eq!(seen.len(), p.nodes.len());
            }
        }
    }
}
