use std::collections::BTreeMap;

use smallvec::SmallVec;

use super::{for_each_product, forms_tree, rank_groups, Query, SearchOutcome, SearchStats, TreePattern, ValidSubtree};
use crate::error::SearchError;
use crate::graph::{AttrTypeId, EntityId, KnowledgeGraph, PageRankVector};
use crate::index::{IndexedPath, MatchLocus, PathIndex};
use crate::scoring::ScoringConfig;
use crate::text::jaccard_sim;

struct Backward<'a> {
    g: &'a KnowledgeGraph,
    d: usize,
    found: BTreeMap<EntityId, Vec<IndexedPath>>,
}

impl Backward<'_> {
    /// Records the path (stored root-last in `rev_nodes`), then extends it
    /// backwards along every in-edge from an unvisited node.
    fn grow(
        &mut self,
        rev_nodes: &mut Vec<EntityId>,
        rev_attrs: &mut Vec<AttrTypeId>,
        locus: MatchLocus,
        pr_term: f64,
        sim_term: f64,
    ) {
        let path = IndexedPath {
            nodes: rev_nodes.iter().rev().copied().collect(),
            attrs: rev_attrs.iter().rev().copied().collect(),
            locus,
            pr_term,
            sim_term,
        };
        self.found.entry(path.root()).or_default().push(path);
        if rev_nodes.len() >= self.d {
            return;
        }
        let head = *rev_nodes.last().unwrap();
        for &e in self.g.in_edges(head) {
            let edge = self.g.edge(e);
            if rev_nodes.contains(&edge.source) {
                continue;
            }
            rev_nodes.push(edge.source);
            rev_attrs.push(edge.attr);
            self.grow(rev_nodes, rev_attrs, locus, pr_term, sim_term);
            rev_nodes.pop();
            rev_attrs.pop();
        }
    }
}

/// Every root reaching `w` within `d` nodes, with its paths in canonical order.
fn backward_paths(g: &KnowledgeGraph, pr: &PageRankVector, w: &str, d: usize) -> BTreeMap<EntityId, Vec<IndexedPath>> {
    let mut walk = Backward { g, d, found: BTreeMap::new() };
    for (v, e) in g.entities() {
        let text_sim = jaccard_sim(w, &e.tokens);
        let type_sim = jaccard_sim(w, &g.type_label(e.ty).tokens);
        if text_sim == 0.0 && type_sim == 0.0 {
            continue;
        }
        let locus = if text_sim > 0.0 { MatchLocus::NodeText } else { MatchLocus::NodeType };
        walk.grow(&mut vec![v], &mut Vec::new(), locus, pr.get(v), text_sim.max(type_sim));
    }
    if d >= 2 {
        for edge in g.edges() {
            let sim = jaccard_sim(w, &g.attr_label(edge.attr).tokens);
            if sim == 0.0 || edge.source == edge.target {
                continue;
            }
            walk.grow(
                &mut vec![edge.target, edge.source],
                &mut vec![edge.attr],
                MatchLocus::EdgeType,
                pr.get(edge.source),
                sim,
            );
        }
    }
    for paths in walk.found.values_mut() {
        paths.sort_by(IndexedPath::canonical_cmp);
    }
    walk.found
}

/// Enumeration-aggregation without the path index: backward expansion from
/// every keyword match, cross products per common root, then one global
/// group-by pattern. Uses only `d` and PageRank from `idx`.
pub fn search_baseline(
    g: &KnowledgeGraph,
    idx: &PathIndex,
    q: &Query,
    cfg: &ScoringConfig,
) -> Result<SearchOutcome, SearchError> {
    let per_word: Vec<_> = q.keywords().iter().map(|w| backward_paths(g, idx.pagerank(), w, idx.d())).collect();
    let mut stats = SearchStats::default();
    let mut groups: BTreeMap<TreePattern, Vec<ValidSubtree>> = BTreeMap::new();
    for (&root, first) in &per_word[0] {
        let Some(lists) =
            std::iter::once(Some(first)).chain(per_word[1..].iter().map(|m| m.get(&root))).collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        stats.candidate_roots += 1;
        let lens: SmallVec<[usize; 4]> = lists.iter().map(|l| l.len()).collect();
        for_each_product::<()>(&lens, |at| {
            let paths = lists.iter().zip(at).map(|(l, &j)| &l[j]);
            if !forms_tree(paths.clone()) {
                stats.rejected += 1;
                return Ok(());
            }
            stats.accepted += 1;
            let pattern = TreePattern::new(paths.clone().map(|p| p.pattern(g)).collect());
            let subtree = ValidSubtree { root, paths: paths.cloned().collect() };
            groups.entry(pattern).or_default().push(subtree);
            Ok(())
        })
        .expect("infallible");
    }
    stats.log_rejections("baseline");
    let patterns = rank_groups(groups, cfg, q.k())?;
    Ok(SearchOutcome { patterns, stats })
}
