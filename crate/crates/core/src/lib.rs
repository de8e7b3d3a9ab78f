//! Keyword search over knowledge graphs that ranks tree patterns: groups of
//! keyword-matching subtrees with the same shape and types, each rendered as
//! a table.
//!
//! Typical flow: [`graph::load_graph`], [`graph::compute_pagerank`],
//! [`index::build_indexes`], then one of the engines in [`search`], and
//! [`table::render_table`] or [`output::ResultDocument`] for presentation.

pub mod error;
pub mod fixture;
pub mod gen;
pub mod graph;
pub mod harness;
pub mod index;
pub mod output;
pub mod scoring;
pub mod search;
pub mod table;
pub mod text;

pub use error::{GraphError, IndexFormatError, ScoreError, SearchError, TableError};
pub use graph::{
    compute_pagerank, load_graph, load_graph_with, AttrTypeId, EntityId, EntityTypeId, GraphBuilder, KnowledgeGraph,
    PageRankVector,
};
pub use index::{build_indexes, deserialize, serialize, IndexedPath, MatchLocus, PathIndex, PathPattern};
pub use scoring::{pattern_score, pattern_score_estimate, tree_score, Aggregator, ScoringConfig};
pub use search::{
    assemble_subtree, brute_force_count, brute_force_patterns, search_baseline, search_linear_enum, search_linear_topk,
    search_pattern_enum, Query, SamplingConfig, ScoredPattern, SearchOutcome, TreePattern, ValidSubtree,
};
pub use table::{render_table, TableAnswer};
pub use text::Tokenizer;
