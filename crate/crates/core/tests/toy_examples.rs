mod common;

use common::pattern;
use kgp_core::fixture::{toy_graph, TOY_D, TOY_QUERY};
use kgp_core::scoring::score_components;
use kgp_core::search::{search_linear_enum, TreePattern, ValidSubtree};
use kgp_core::{
    build_indexes, compute_pagerank, deserialize, search_baseline, search_linear_topk, search_pattern_enum, serialize,
    EntityId, KnowledgeGraph, PageRankVector, PathIndex, Query, SamplingConfig, ScoringConfig,
};

fn v(g: &KnowledgeGraph, key: &str) -> EntityId {
    g.lookup(key).unwrap_or_else(|| panic!("no entity {key}"))
}

fn unit_pr_index(g: &KnowledgeGraph) -> PathIndex {
    build_indexes(g, &PageRankVector::uniform(g.entity_count(), 1.0), TOY_D)
}

fn query(g: &KnowledgeGraph, k: usize) -> Query {
    Query::parse(TOY_QUERY, k, g.tokenizer()).unwrap()
}

/// The member rooted at `root` whose paths visit exactly `nodes`.
fn member<'a>(
    groups: &'a [(TreePattern, Vec<ValidSubtree>)],
    root: EntityId,
    nodes: &[&[EntityId]],
) -> (&'a TreePattern, &'a ValidSubtree) {
    groups
        .iter()
        .flat_map(|(p, ts)| ts.iter().map(move |t| (p, t)))
        .find(|(_, t)| t.root == root && t.paths.iter().zip(nodes).all(|(p, n)| p.nodes.as_slice() == *n))
        .expect("member present")
}

#[test]
fn subtree_score_components() {
    let g = toy_graph();
    let idx = unit_pr_index(&g);
    let groups = search_linear_enum(&idx, &query(&g, 10)).groups;
    let (v1, v2, v3, v12, v13) = (v(&g, "v1"), v(&g, "v2"), v(&g, "v3"), v(&g, "v12"), v(&g, "v13"));
    let revenue = g.lookup_attr("Revenue").unwrap();
    let v4 = g.out_edges(v3).iter().map(|&e| g.edge(e)).find(|e| e.attr == revenue).unwrap().target;
    let v14 = g.out_edges(v13).iter().map(|&e| g.edge(e)).find(|e| e.attr == revenue).unwrap().target;

    let (_, t1) = member(&groups, v1, &[&[v1, v2], &[v1], &[v1, v3], &[v1, v3, v4]]);
    let c1 = score_components(&t1.paths);
    assert_eq!(c1.size, 8.0);
    assert_eq!(c1.pagerank, 4.0);
    assert!((c1.similarity - 3.5).abs() < 1e-12);
    assert!((t1.score(&ScoringConfig::default()).unwrap() - 1.75).abs() < 1e-12);

    let (_, t3) = member(&groups, v12, &[&[v12], &[v12], &[v12, v13], &[v12, v13, v14]]);
    let c3 = score_components(&t3.paths);
    assert_eq!(c3.size, 7.0);
    assert!((c3.similarity - 7.0 / 3.0).abs() < 1e-12);
}

#[test]
fn pattern_with_two_members_outranks_book_pattern() {
    let g = toy_graph();
    let idx = unit_pr_index(&g);
    let cfg = ScoringConfig::default();
    let q = query(&g, 100);
    let ranked = search_baseline(&g, &idx, &q, &cfg).unwrap().patterns;
    let p1 = TreePattern::new(vec![
        pattern(&g, &["Software", "Genre", "Model"]),
        pattern(&g, &["Software"]),
        pattern(&g, &["Software", "Developer", "Company"]),
        pattern(&g, &["Software", "Developer", "Company", "Revenue"]),
    ]);
    let p2 = TreePattern::new(vec![
        pattern(&g, &["Book"]),
        pattern(&g, &["Book"]),
        pattern(&g, &["Book", "Publisher", "Company"]),
        pattern(&g, &["Book", "Publisher", "Company", "Revenue"]),
    ]);
    let pos = |p: &TreePattern| ranked.iter().position(|s| s.pattern == *p).unwrap();
    assert_eq!(pos(&p1), 0);
    assert!(pos(&p1) < pos(&p2));
    let s1 = &ranked[pos(&p1)];
    let roots: Vec<_> = s1.subtrees.iter().map(|t| t.root).collect();
    assert_eq!(roots, vec![v(&g, "v1"), v(&g, "v7")]);
    assert!(s1.score > ranked[pos(&p2)].score);
    assert!((ranked[pos(&p2)].score - 4.0 / 3.0).abs() < 1e-12);

    // the two top-k engines agree with the baseline on the first two
    let top2 = search_baseline(&g, &idx, &query(&g, 2), &cfg).unwrap().patterns;
    let pe = search_pattern_enum(&idx, &query(&g, 2), &cfg).unwrap().patterns;
    let lt = search_linear_topk(&idx, &query(&g, 2), &cfg, &SamplingConfig::exact()).unwrap().patterns;
    assert_eq!(top2[0].pattern, p1);
    assert_eq!(top2, pe);
    assert_eq!(top2, lt);
}

#[test]
fn database_index_entries() {
    let g = toy_graph();
    let pr = compute_pagerank(&g, 0.85, 1e-8);
    let idx = build_indexes(&g, &pr, TOY_D);
    check_database_entries(&g, &idx);
    let again = deserialize(&serialize(&idx)).unwrap();
    assert_eq!(again, idx);
    check_database_entries(&g, &again);
}

fn check_database_entries(g: &KnowledgeGraph, idx: &PathIndex) {
    let (v1, v2, v7, v9, v12) = (v(g, "v1"), v(g, "v2"), v(g, "v7"), v(g, "v9"), v(g, "v12"));
    let sgm = pattern(g, &["Software", "Genre", "Model"]);
    let srb = pattern(g, &["Software", "Reference", "Book"]);
    let book = pattern(g, &["Book"]);
    let model = pattern(g, &["Model"]);
    // the two Model entities contain the keyword themselves, so they are roots too
    assert_eq!(idx.patns("database"), &[model.clone(), book.clone(), sgm.clone(), srb.clone()]);
    assert_eq!(idx.roots("database"), vec![v1, v2, v7, v9, v12]);
    assert_eq!(idx.roots_with_pattern("database", &srb), vec![v1]);
    assert_eq!(idx.roots_with_pattern("database", &sgm), vec![v1, v7]);
    assert_eq!(idx.roots_with_pattern("database", &book), vec![v12]);
    let p = idx.paths_by_root("database", v1, &sgm);
    assert_eq!(p.len(), 1);
    assert_eq!(p[0].nodes.as_slice(), &[v1, v2]);
    assert_eq!(idx.paths_by_pattern("database", &sgm, v1), p);
    assert_eq!(idx.patns_at_root("database", v1), vec![&sgm, &srb]);
    assert!(idx.paths_by_pattern("database", &srb, v7).is_empty());
}

#[test]
fn joins_and_candidate_roots() {
    let g = toy_graph();
    let idx = unit_pr_index(&g);
    let cfg = ScoringConfig::default();
    let q = query(&g, 1);
    let pe = search_pattern_enum(&idx, &q, &cfg).unwrap();
    let roots: Vec<_> = pe.patterns[0].subtrees.iter().map(|t| t.root).collect();
    assert_eq!(roots, vec![v(&g, "v1"), v(&g, "v7")]);

    let lt = search_linear_topk(&idx, &q, &cfg, &SamplingConfig::exact()).unwrap();
    assert_eq!(lt.stats.candidate_roots, 3);
    let per_type: usize = lt.stats.per_type.iter().map(|t| t.candidate_roots).sum();
    assert_eq!(per_type, 3);
    assert_eq!(pe.stats.candidate_roots, 3);
    for t in &lt.stats.per_type {
        assert!(t.accepted <= t.upper_bound);
    }
}

#[test]
fn default_pagerank_keeps_the_same_winner() {
    let g = toy_graph();
    let pr = compute_pagerank(&g, 0.85, 1e-8);
    let idx = build_indexes(&g, &pr, TOY_D);
    let out = search_linear_topk(&idx, &query(&g, 3), &ScoringConfig::default(), &SamplingConfig::exact()).unwrap();
    assert_eq!(out.patterns[0].subtrees.len(), 2);
    assert_eq!(out.patterns[0].pattern.root_type(), g.lookup_type("Software").unwrap());
}
