//! Table answers: one row per valid subtree, one column per distinct
//! pattern-prefix position.

use serde::Serialize;

use crate::error::TableError;
use crate::graph::{EntityId, KnowledgeGraph, TEXT_TYPE_NAME};
use crate::index::{display_elems, PatternElem};
use crate::search::{TreePattern, ValidSubtree};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    /// Pattern prefix up to and including the column's node.
    #[serde(skip)]
    pub key: Vec<PatternElem>,
    /// Same prefix rendered as `(Type)(Attr)(Type)…`.
    pub path: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableAnswer {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<String>>,
}

/// Position of a node in a subtree: keyword index, depth along its path.
type Slot = (usize, usize);

fn node_at(t: &ValidSubtree, (i, j): Slot) -> EntityId {
    t.paths[i].nodes[j]
}

fn check(g: &KnowledgeGraph, pattern: &TreePattern, subtrees: &[ValidSubtree]) -> Result<(), TableError> {
    for (index, t) in subtrees.iter().enumerate() {
        let mismatch = |reason: String| Err(TableError::Mismatch { index, reason });
        if t.paths.len() != pattern.paths.len() {
            return mismatch(format!("{} paths for {} keywords", t.paths.len(), pattern.paths.len()));
        }
        for (i, (p, want)) in t.paths.iter().zip(&pattern.paths).enumerate() {
            if p.root() != t.root {
                return mismatch(format!("path {i} starts at {} instead of {}", p.root(), t.root));
            }
            if p.pattern(g) != *want {
                return mismatch(format!("path {i} does not follow its pattern"));
            }
        }
    }
    Ok(())
}

fn short_name(g: &KnowledgeGraph, key: &[PatternElem]) -> String {
    let type_name = |e: &PatternElem| match *e {
        PatternElem::Node(t) => Some(g.type_label(t).name.clone()),
        PatternElem::Attr(_) => None,
    };
    let attr_name = |e: &PatternElem| match *e {
        PatternElem::Attr(a) => Some(g.attr_label(a).name.clone()),
        PatternElem::Node(_) => None,
    };
    match key {
        [only] => type_name(only).unwrap_or_default(),
        [.., a, last] => match (attr_name(a), type_name(last)) {
            (Some(a), Some(t)) if t == TEXT_TYPE_NAME => a,
            (Some(a), Some(t)) => format!("{a} ({t})"),
            // edge-ending prefix: the target's type is not part of the pattern
            _ => attr_name(last).unwrap_or_default(),
        },
        [] => String::new(),
    }
}

/// Builds the table for one pattern.
///
/// Columns go keyword by keyword, root to leaf. A position joins an earlier
/// column when both share the pattern prefix and hold the same node in every
/// row. Short column names fall back to the full prefix on collision.
pub fn render_table(
    g: &KnowledgeGraph,
    pattern: &TreePattern,
    subtrees: &[ValidSubtree],
) -> Result<TableAnswer, TableError> {
    check(g, pattern, subtrees)?;
    let mut slots: Vec<Slot> = Vec::new();
    let mut keys: Vec<&[PatternElem]> = Vec::new();
    for (i, p) in pattern.paths.iter().enumerate() {
        for j in 0..p.len() {
            let key = p.prefix_through_node(j);
            let merged = slots
                .iter()
                .zip(&keys)
                .any(|(&s, &k)| k == key && subtrees.iter().all(|t| node_at(t, s) == node_at(t, (i, j))));
            if !merged {
                slots.push((i, j));
                keys.push(key);
            }
        }
    }

    let type_names = g.type_names();
    let attr_names = g.attr_names();
    let mut columns: Vec<Column> = keys
        .iter()
        .map(|k| Column { key: k.to_vec(), path: display_elems(k, &type_names, &attr_names), name: short_name(g, k) })
        .collect();
    let names: Vec<String> = columns.iter().map(|c| c.name.clone()).collect();
    for c in &mut columns {
        if names.iter().filter(|n| **n == c.name).count() > 1 {
            c.name = c.path.clone();
        }
    }

    let rows =
        subtrees.iter().map(|t| slots.iter().map(|&s| g.display_text(node_at(t, s)).to_owned()).collect()).collect();
    Ok(TableAnswer { columns, rows })
}

impl TableAnswer {
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    /// Aligned plain-text rendering with a header rule.
    pub fn to_text(&self) -> String {
        let header: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &mut dyn Iterator<Item = &str>| {
            let parts: Vec<String> = cells.zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
            parts.join(" | ").trim_end().to_owned()
        };
        let mut out = line(&mut header.iter().copied());
        out.push('\n');
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        out.push_str(&rule.join("-+-"));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(&mut row.iter().map(String::as_str)));
            out.push('\n');
        }
        out
    }

    /// CSV with a header record of column names.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name.as_str())).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("table serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{compute_pagerank, GraphBuilder};
    use crate::index::build_indexes;
    use crate::search::{search_linear_enum, Query};

    fn enumerate(g: &KnowledgeGraph, q: &str, d: usize) -> Vec<(TreePattern, Vec<ValidSubtree>)> {
        let pr = compute_pagerank(g, 0.85, 1e-8);
        let idx = build_indexes(g, &pr, d);
        search_linear_enum(&idx, &Query::parse(q, 10, g.tokenizer()).unwrap()).groups
    }

    #[test]
    fn single_node_pattern_has_one_column() {
        let mut b = GraphBuilder::default();
        b.entity("x", "Thing", "alpha").unwrap();
        let g = b.finish();
        let groups = enumerate(&g, "alpha", 1);
        let t = render_table(&g, &groups[0].0, &groups[0].1).unwrap();
        assert_eq!(t.width(), 1);
        assert_eq!(t.columns[0].name, "Thing");
        assert_eq!(t.rows, vec![vec!["alpha".to_owned()]]);
    }

    #[test]
    fn shared_full_path_merges() {
        let mut b = GraphBuilder::default();
        let r = b.entity("r", "Team", "lions").unwrap();
        let c = b.entity("c", "City", "alpha beta").unwrap();
        b.edge(r, "Home", c);
        b.literal_edge(c, "Mayor", "Jane Doe");
        let g = b.finish();
        let groups = enumerate(&g, "alpha beta mayor", 3);
        let (pattern, subtrees) = groups.iter().find(|(p, _)| p.root_type() == g.entity_type(r)).unwrap();
        let t = render_table(&g, pattern, subtrees).unwrap();
        // naive: 2 + 2 + 3 positions; merged: Team, Home (City), Mayor
        assert_eq!(t.width(), 3);
        let names: Vec<_> = t.columns.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["Team", "Home (City)", "Mayor"]);
        assert_eq!(t.rows[0], ["lions", "alpha beta", "Jane Doe"]);
        assert!(t.to_csv().starts_with("Team,Home (City),Mayor\n"));
        assert!(t.to_text().contains("Jane Doe"));
    }

    #[test]
    fn same_prefix_different_nodes_stay_apart() {
        let mut b = GraphBuilder::default();
        let r = b.entity("r", "Team", "").unwrap();
        let x = b.entity("x", "Player", "alpha").unwrap();
        let y = b.entity("y", "Player", "beta").unwrap();
        b.edge(r, "Member", x);
        b.edge(r, "Member", y);
        let g = b.finish();
        let groups = enumerate(&g, "alpha beta", 2);
        let (pattern, subtrees) = groups.iter().find(|(p, _)| p.root_type() == g.entity_type(r)).unwrap();
        let t = render_table(&g, pattern, subtrees).unwrap();
        assert_eq!(t.width(), 3);
        // both player columns would be "Member (Player)", so the full path is used
        assert_eq!(t.columns[1].name, "(Team)(Member)(Player)");
        assert_eq!(t.rows[0], ["r", "alpha", "beta"]);
    }

    #[test]
    fn mismatch_is_reported() {
        let mut b = GraphBuilder::default();
        b.entity("x", "Thing", "alpha beta").unwrap();
        let g = b.finish();
        let groups = enumerate(&g, "alpha beta", 1);
        let (pattern, subtrees) = &groups[0];
        let mut bad = subtrees.clone();
        bad[0].paths.pop();
        assert!(matches!(render_table(&g, pattern, &bad), Err(TableError::Mismatch { index: 0, .. })));
    }
}
