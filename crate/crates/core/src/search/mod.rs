//! Query engines over the path index.
//!
//! * [`search_baseline`]: index-free backward expansion, then a global group-by.
//! * [`search_pattern_enum`]: enumerate pattern combinations per root type, join roots.
//! * [`search_linear_enum`]: expand every candidate root once (full enumeration).
//! * [`search_linear_topk`]: per-type linear expansion with optional root sampling.
//! * [`brute_force_patterns`]: exhaustive forward DFS used as a test oracle.
//!
//! All engines rank by score descending, then by [`TreePattern`] order, and
//! list the members of a pattern by root id, then by their paths.

mod baseline;
mod linear;
mod oracle;
mod pattern_enum;
mod topk;

use std::cmp::Ordering;

use serde::Serialize;
use smallvec::SmallVec;

use crate::error::SearchError;
use crate::graph::{AttrTypeId, EntityId, EntityTypeId};
use crate::index::{display_elems, IndexedPath, PathPattern};
use crate::scoring::{pattern_score, tree_score, ScoringConfig};
use crate::text::Tokenizer;

pub use baseline::search_baseline;
pub use linear::{estimate_type_scores, search_linear_enum, search_linear_topk};
pub use oracle::{brute_force_count, brute_force_patterns};
pub use pattern_enum::search_pattern_enum;
pub use topk::TopKQueue;

/// A keyword query: distinct tokens in first-seen order, plus `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Query {
    keywords: Vec<String>,
    k: usize,
}

impl Query {
    /// Builds a query from already-normalized tokens. Repeated tokens are dropped.
    pub fn new<I, S>(keywords: I, k: usize) -> Result<Self, SearchError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out: Vec<String> = Vec::new();
        for w in keywords {
            let w = w.into();
            if !w.is_empty() && !out.contains(&w) {
                out.push(w);
            }
        }
        if out.is_empty() {
            return Err(SearchError::EmptyQuery);
        }
        if k == 0 {
            return Err(SearchError::ZeroK);
        }
        Ok(Self { keywords: out, k })
    }

    /// Tokenizes free text with the graph's tokenizer.
    pub fn parse(text: &str, k: usize, tokenizer: &Tokenizer) -> Result<Self, SearchError> {
        Self::new(tokenizer.tokenize(text), k)
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }
}

/// One path pattern per keyword, all starting at the same root type.
///
/// Ordered lexicographically over the per-keyword patterns, which matches
/// byte order of [`TreePattern::canonical_bytes`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreePattern {
    pub paths: Vec<PathPattern>,
}

impl TreePattern {
    pub fn new(paths: Vec<PathPattern>) -> Self {
        Self { paths }
    }

    pub fn root_type(&self) -> EntityTypeId {
        self.paths[0].root_type()
    }

    /// Longest path pattern, in nodes.
    pub fn height(&self) -> usize {
        self.paths.iter().map(PathPattern::len).max().unwrap_or(0)
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for p in &self.paths {
            p.write_canonical(&mut out);
        }
        out
    }

    /// One `(Type)(Attr)(Type)…` string per keyword.
    pub fn display(&self, type_names: &[String], attr_names: &[String]) -> Vec<String> {
        self.paths.iter().map(|p| display_elems(p.elems(), type_names, attr_names)).collect()
    }
}

/// A valid subtree: one path per keyword, joined at `root`, forming a tree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidSubtree {
    pub root: EntityId,
    pub paths: Vec<IndexedPath>,
}

impl ValidSubtree {
    /// Distinct nodes in first-visit order.
    pub fn nodes(&self) -> Vec<EntityId> {
        let mut out = vec![self.root];
        for p in &self.paths {
            for &v in &p.nodes[1..] {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Distinct `(parent, attr, child)` edges.
    pub fn edges(&self) -> Vec<(EntityId, AttrTypeId, EntityId)> {
        let mut out = Vec::new();
        for p in &self.paths {
            for (i, &a) in p.attrs.iter().enumerate() {
                let e = (p.nodes[i], a, p.nodes[i + 1]);
                if !out.contains(&e) {
                    out.push(e);
                }
            }
        }
        out
    }

    pub fn score(&self, cfg: &ScoringConfig) -> Result<f64, SearchError> {
        Ok(tree_score(&self.paths, cfg)?)
    }

    /// Member order: root, then paths keyword by keyword.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.root.cmp(&other.root).then_with(|| {
            self.paths
                .iter()
                .zip(&other.paths)
                .map(|(a, b)| a.canonical_cmp(b))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    }
}

/// `true` if every non-root node is entered through a single `(parent, attr)`.
pub(crate) fn forms_tree<'a>(paths: impl IntoIterator<Item = &'a IndexedPath>) -> bool {
    let mut parent: SmallVec<[(EntityId, EntityId, AttrTypeId); 12]> = SmallVec::new();
    for p in paths {
        for i in 1..p.nodes.len() {
            let (child, from, attr) = (p.nodes[i], p.nodes[i - 1], p.attrs[i - 1]);
            match parent.iter().find(|e| e.0 == child) {
                Some(e) if (e.1, e.2) != (from, attr) => return false,
                Some(_) => {}
                None => parent.push((child, from, attr)),
            }
        }
    }
    true
}

/// Joins one path per keyword at `root`. `None` when a path starts elsewhere
/// or the union is not a tree (some node reached through two different edges).
pub fn assemble_subtree(root: EntityId, paths: &[IndexedPath]) -> Option<ValidSubtree> {
    if paths.iter().any(|p| p.root() != root) || !forms_tree(paths) {
        return None;
    }
    Some(ValidSubtree { root, paths: paths.to_vec() })
}

/// Root sampling parameters. `lambda: None` never samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingConfig {
    pub lambda: Option<u64>,
    pub rho: f64,
    pub seed: u64,
}

impl SamplingConfig {
    /// No sampling: exact top-k.
    pub fn exact() -> Self {
        Self { lambda: None, rho: 1.0, seed: 0 }
    }
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self::exact()
    }
}

/// A ranked pattern with its members.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPattern {
    pub pattern: TreePattern,
    pub score: f64,
    /// Scaled sample score when the pattern's root type was sampled.
    pub estimated_score: Option<f64>,
    pub subtree_count: usize,
    pub subtrees: Vec<ValidSubtree>,
}

/// Per root type figures for one query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeStats {
    pub root_type: EntityTypeId,
    pub candidate_roots: usize,
    /// `N_R`: sum over candidate roots of the per-keyword path count product.
    pub upper_bound: u64,
    pub accepted: u64,
    /// Path tuples whose union was not a tree.
    pub rejected: u64,
    pub rate: f64,
    pub selected_roots: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SearchStats {
    pub candidate_roots: usize,
    pub accepted: u64,
    pub rejected: u64,
    /// Pattern combinations tried (pattern enumeration only).
    pub combinations: u64,
    /// Combinations whose root intersection was empty.
    pub empty_combinations: u64,
    pub per_type: Vec<TypeStats>,
}

impl SearchStats {
    pub(crate) fn log_rejections(&self, engine: &str) {
        if self.rejected > 0 {
            log::info!("{engine}: {} path tuples rejected as non-trees ({} accepted)", self.rejected, self.accepted);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub patterns: Vec<ScoredPattern>,
    pub stats: SearchStats,
}

/// Full enumeration: every pattern with all its members, in pattern order.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub groups: Vec<(TreePattern, Vec<ValidSubtree>)>,
    pub stats: SearchStats,
}

impl Enumeration {
    /// Scores every group and returns the best `k`.
    pub fn rank(&self, cfg: &ScoringConfig, k: usize) -> Result<Vec<ScoredPattern>, SearchError> {
        rank_groups(self.groups.iter().cloned(), cfg, k)
    }
}

pub(crate) fn rank_groups(
    groups: impl IntoIterator<Item = (TreePattern, Vec<ValidSubtree>)>,
    cfg: &ScoringConfig,
    k: usize,
) -> Result<Vec<ScoredPattern>, SearchError> {
    let mut queue = TopKQueue::new(k);
    for (pattern, mut subtrees) in groups {
        subtrees.sort_by(ValidSubtree::canonical_cmp);
        let scores = subtrees.iter().map(|t| t.score(cfg)).collect::<Result<Vec<_>, _>>()?;
        let score = pattern_score(&scores, cfg.aggregator)?;
        queue.push(score, pattern, subtrees);
    }
    Ok(queue
        .into_sorted()
        .into_iter()
        .map(|(score, pattern, subtrees)| ScoredPattern {
            pattern,
            score,
            estimated_score: None,
            subtree_count: subtrees.len(),
            subtrees,
        })
        .collect())
}

/// Calls `f` with every index tuple of the product `0..lens[0] × 0..lens[1] × …`,
/// last position fastest.
pub(crate) fn for_each_product<E>(lens: &[usize], mut f: impl FnMut(&[usize]) -> Result<(), E>) -> Result<(), E> {
    if lens.contains(&0) {
        return Ok(());
    }
    let mut at: SmallVec<[usize; 4]> = SmallVec::from_elem(0, lens.len());
    loop {
        f(&at)?;
        let mut i = lens.len();
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            at[i] += 1;
            if at[i] < lens[i] {
                break;
            }
            at[i] = 0;
        }
    }
}
