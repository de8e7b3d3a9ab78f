//! JSON result document.
//!
//! ```json
//! {
//!   "query": {"text": "...", "keywords": ["..."], "k": 5},
//!   "algorithm": "linear-topk",
//!   "params": {"d": 3, "lambda": null, "rho": 1.0, "seed": 0, "scoring": {...}},
//!   "patterns": [
//!     {"rank": 1, "paths": ["(Software)(Genre)(Model)", "..."], "score": 1.75,
//!      "estimated_score": null, "count": 2, "columns": [...], "rows": [[...]]}
//!   ],
//!   "stats": {...}
//! }
//! ```
//!
//! `lambda: null` means sampling is never triggered. No wall-clock values are
//! included, so equal inputs give byte-identical documents.

use serde::Serialize;

use crate::error::TableError;
use crate::graph::KnowledgeGraph;
use crate::scoring::ScoringConfig;
use crate::search::{Query, SamplingConfig, ScoredPattern, SearchStats};
use crate::table::{render_table, Column, TableAnswer};

#[derive(Debug, Clone, Serialize)]
pub struct QueryEcho {
    pub text: String,
    pub keywords: Vec<String>,
    pub k: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Params {
    pub d: usize,
    pub lambda: Option<u64>,
    pub rho: f64,
    pub seed: u64,
    pub scoring: ScoringConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternResult {
    pub rank: usize,
    pub paths: Vec<String>,
    pub score: f64,
    pub estimated_score: Option<f64>,
    pub count: usize,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    pub query: QueryEcho,
    pub algorithm: String,
    pub params: Params,
    pub patterns: Vec<PatternResult>,
    pub stats: SearchStats,
}

/// Everything needed to describe one finished query.
pub struct QueryRun<'a> {
    pub text: &'a str,
    pub query: &'a Query,
    pub algorithm: &'a str,
    pub d: usize,
    pub sampling: SamplingConfig,
    pub scoring: ScoringConfig,
}

impl ResultDocument {
    pub fn build(
        g: &KnowledgeGraph,
        run: &QueryRun<'_>,
        patterns: &[ScoredPattern],
        stats: &SearchStats,
    ) -> Result<Self, TableError> {
        let type_names = g.type_names();
        let attr_names = g.attr_names();
        let patterns = patterns
            .iter()
            .enumerate()
            .map(|(i, sp)| {
                let TableAnswer { columns, rows } = render_table(g, &sp.pattern, &sp.subtrees)?;
                Ok(PatternResult {
                    rank: i + 1,
                    paths: sp.pattern.display(&type_names, &attr_names),
                    score: sp.score,
                    estimated_score: sp.estimated_score,
                    count: sp.subtree_count,
                    columns,
                    rows,
                })
            })
            .collect::<Result<Vec<_>, TableError>>()?;
        Ok(Self {
            query: QueryEcho { text: run.text.to_owned(), keywords: run.query.keywords().to_vec(), k: run.query.k() },
            algorithm: run.algorithm.to_owned(),
            params: Params {
                d: run.d,
                lambda: run.sampling.lambda,
                rho: run.sampling.rho,
                seed: run.sampling.seed,
                scoring: run.scoring,
            },
            patterns,
            stats: stats.clone(),
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// Human-readable listing: pattern header, then its table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.patterns.is_empty() {
            out.push_str("no tree patterns found\n");
        }
        for p in &self.patterns {
            out.push_str(&format!("#{} score={:.6} subtrees={}", p.rank, p.score, p.count));
            if let Some(est) = p.estimated_score {
                out.push_str(&format!(" estimate={est:.6}"));
            }
            out.push('\n');
            for path in &p.paths {
                out.push_str(&format!("  {path}\n"));
            }
            let table = TableAnswer { columns: p.columns.clone(), rows: p.rows.clone() };
            out.push_str(&table.to_text());
            out.push('\n');
        }
        out
    }

    /// One CSV block per pattern, separated by a `# rank …` comment line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in &self.patterns {
            out.push_str(&format!("# rank {} score {}\n", p.rank, p.score));
            let table = TableAnswer { columns: p.columns.clone(), rows: p.rows.clone() };
            out.push_str(&table.to_csv());
        }
        out
    }
}
