use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::graph::{AttrTypeId, EntityId, EntityTypeId, KnowledgeGraph};

/// One element of a path pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PatternElem {
    Node(EntityTypeId),
    Attr(AttrTypeId),
}

/// Type signature of a root-to-match path: `C (A C)*`, optionally ending in a
/// trailing attribute when the keyword matched an edge.
///
/// Ordered length-lexicographically: first by element count, then element by
/// element with node types before attribute types. [`PathPattern::canonical_bytes`]
/// sorts the same way under plain byte comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathPattern {
    elems: SmallVec<[PatternElem; 7]>,
}

impl PathPattern {
    /// Builds a pattern, checking the alternation invariant.
    pub fn new(elems: impl IntoIterator<Item = PatternElem>) -> Option<Self> {
        let elems: SmallVec<[PatternElem; 7]> = elems.into_iter().collect();
        let well_formed = !elems.is_empty()
            && elems.iter().enumerate().all(|(i, e)| match e {
                PatternElem::Node(_) => i % 2 == 0,
                PatternElem::Attr(_) => i % 2 == 1,
            });
        well_formed.then_some(Self { elems })
    }

    /// Pattern of a concrete path. `edge_match` drops the final node type.
    pub fn of_path(g: &KnowledgeGraph, nodes: &[EntityId], attrs: &[AttrTypeId], edge_match: bool) -> Self {
        let mut elems = SmallVec::with_capacity(nodes.len() * 2);
        for (i, &v) in nodes.iter().enumerate() {
            if i > 0 {
                elems.push(PatternElem::Attr(attrs[i - 1]));
            }
            if !(edge_match && i + 1 == nodes.len()) {
                elems.push(PatternElem::Node(g.entity_type(v)));
            }
        }
        Self { elems }
    }

    pub fn elems(&self) -> &[PatternElem] {
        &self.elems
    }

    /// Number of nodes on a path with this pattern (the pattern length).
    pub fn len(&self) -> usize {
        self.elems.len() / 2 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_edge_ending(&self) -> bool {
        self.elems.len().is_multiple_of(2)
    }

    pub fn root_type(&self) -> EntityTypeId {
        match self.elems[0] {
            PatternElem::Node(t) => t,
            PatternElem::Attr(_) => unreachable!("patterns start with a node type"),
        }
    }

    /// Prefix covering the path up to and including the node at `depth`
    /// (0 = root). For the last node of an edge-ending pattern this is the
    /// whole pattern.
    pub fn prefix_through_node(&self, depth: usize) -> &[PatternElem] {
        let end = (2 * depth + 1).min(self.elems.len());
        &self.elems[..end]
    }

    /// `u32` element count, then per element a tag byte (0 node, 1 attr) and
    /// the big-endian id.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 5 * self.elems.len());
        self.write_canonical(&mut out);
        out
    }

    pub(crate) fn write_canonical(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.elems.len() as u32).to_be_bytes());
        for e in &self.elems {
            let (tag, id) = match *e {
                PatternElem::Node(t) => (0u8, t.0),
                PatternElem::Attr(a) => (1u8, a.0),
            };
            out.push(tag);
            out.extend_from_slice(&id.to_be_bytes());
        }
    }

    /// `(Software)(Developer)(Company)(Revenue)` style rendering.
    pub fn display(&self, type_names: &[String], attr_names: &[String]) -> String {
        display_elems(&self.elems, type_names, attr_names)
    }
}

pub(crate) fn display_elems(elems: &[PatternElem], type_names: &[String], attr_names: &[String]) -> String {
    let mut s = String::new();
    for e in elems {
        let name = match *e {
            PatternElem::Node(t) => type_names.get(t.index()).map(String::as_str).unwrap_or("?"),
            PatternElem::Attr(a) => attr_names.get(a.index()).map(String::as_str).unwrap_or("?"),
        };
        let _ = write!(s, "({name})");
    }
    s
}

impl Ord for PathPattern {
    fn cmp(&self, other: &Self) -> Ordering {
        self.elems.len().cmp(&other.elems.len()).then_with(|| self.elems.cmp(&other.elems))
    }
}

impl PartialOrd for PathPattern {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Where in the terminal node or edge the keyword was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchLocus {
    NodeText = 0,
    NodeType = 1,
    EdgeType = 2,
}

impl MatchLocus {
    pub fn from_u8(b: u8) -> Option<Self> {
        match b {
            0 => Some(Self::NodeText),
            1 => Some(Self::NodeType),
            2 => Some(Self::EdgeType),
            _ => None,
        }
    }

    pub fn is_edge(self) -> bool {
        self == Self::EdgeType
    }
}

/// A materialized root-to-match path with its precomputed score terms.
///
/// `nodes[0]` is the root. For an edge match the last edge carries the
/// keyword and `nodes` still includes that edge's target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedPath {
    pub nodes: SmallVec<[EntityId; 4]>,
    pub attrs: SmallVec<[AttrTypeId; 3]>,
    pub locus: MatchLocus,
    /// PageRank of the matched node, or of the matched edge's source.
    pub pr_term: f64,
    /// Jaccard similarity of the keyword and the matched text.
    pub sim_term: f64,
}

impl IndexedPath {
    #[inline]
    pub fn root(&self) -> EntityId {
        self.nodes[0]
    }

    /// Number of nodes on the path, edge-match target included.
    #[inline]
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn pattern(&self, g: &KnowledgeGraph) -> PathPattern {
        PathPattern::of_path(g, &self.nodes, &self.attrs, self.locus.is_edge())
    }

    /// Total order on the path identity (nodes, attributes, locus).
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.nodes
            .cmp(&other.nodes)
            .then_with(|| self.attrs.cmp(&other.attrs))
            .then_with(|| self.locus.cmp(&other.locus))
    }

    /// Same identity, ignoring the score terms.
    pub fn same_path(&self, other: &Self) -> bool {
        self.canonical_cmp(other) == Ordering::Equal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(t: u32) -> PatternElem {
        PatternElem::Node(EntityTypeId(t))
    }
    fn a(t: u32) -> PatternElem {
        PatternElem::Attr(AttrTypeId(t))
    }

    #[test]
    fn shape_checks() {
        assert!(PathPattern::new([]).is_none());
        assert!(PathPattern::new([a(1)]).is_none());
        assert!(PathPattern::new([n(1), n(2)]).is_none());
        let p = PathPattern::new([n(1), a(0), n(2), a(3)]).unwrap();
        assert!(p.is_edge_ending());
        assert_eq!(p.len(), 3);
        assert_eq!(p.root_type(), EntityTypeId(1));
        assert_eq!(p.prefix_through_node(1), &[n(1), a(0), n(2)]);
        assert_eq!(p.prefix_through_node(2), p.elems());
        let q = PathPattern::new([n(4)]).unwrap();
        assert_eq!(q.len(), 1);
        assert!(!q.is_edge_ending());
    }

    #[test]
    fn display_uses_names() {
        let types = vec!["TEXT".to_owned(), "Software".to_owned(), "Company".to_owned()];
        let attrs = vec!["Developer".to_owned(), "Revenue".to_owned()];
        let p = PathPattern::new([n(1), a(0), n(2), a(1)]).unwrap();
        assert_eq!(p.display(&types, &attrs), "(Software)(Developer)(Company)(Revenue)");
    }

    fn arb_pattern() -> impl Strategy<Value = PathPattern> {
        (proptest::collection::vec((0u32..300, 0u32..300), 0..3), 0u32..300, proptest::option::of(0u32..300)).prop_map(
            |(steps, root, tail)| {
                let mut elems = vec![n(root)];
                for (attr, ty) in steps {
                    elems.push(a(attr));
                    elems.push(n(ty));
                }
                if let Some(t) = tail {
                    elems.push(a(t));
                }
                PathPattern::new(elems).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn canonical_bytes_order_matches_ord(p in arb_pattern(), q in arb_pattern()) {
            prop_assert_eq!(p.cmp(&q), p.canonical_bytes().cmp(&q.canonical_bytes()));
            prop_assert_eq!(p == q, p.canonical_bytes() == q.canonical_bytes());
        }
    }
}
