//! Subtree and pattern relevance scores.

use serde::{Deserialize, Serialize};

use crate::error::ScoreError;
use crate::index::IndexedPath;

/// How member subtree scores combine into a pattern score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregator {
    #[default]
    Sum,
    Avg,
    Max,
    Count,
}

impl Aggregator {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sum => "sum",
            Self::Avg => "avg",
            Self::Max => "max",
            Self::Count => "count",
        }
    }
}

/// Exponents of the three score factors and the pattern aggregator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringConfig {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub aggregator: Aggregator,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self { z1: -1.0, z2: 1.0, z3: 1.0, aggregator: Aggregator::Sum }
    }
}

/// The three per-subtree sums: node counts, PageRank terms, similarity terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreComponents {
    pub size: f64,
    pub pagerank: f64,
    pub similarity: f64,
}

/// Sums the precomputed terms over one path per keyword, in keyword order.
pub fn score_components<'a>(paths: impl IntoIterator<Item = &'a IndexedPath>) -> ScoreComponents {
    let mut c = ScoreComponents { size: 0.0, pagerank: 0.0, similarity: 0.0 };
    for p in paths {
        c.size += p.node_count() as f64;
        c.pagerank += p.pr_term;
        c.similarity += p.sim_term;
    }
    c
}

fn factor(name: &'static str, x: f64, z: f64) -> Result<f64, ScoreError> {
    if x == 0.0 && z < 0.0 {
        return Err(ScoreError::ZeroFactor { factor: name, exponent: z });
    }
    // integral exponents go through powi so the defaults stay exact
    if z.fract() == 0.0 && z.abs() <= i32::MAX as f64 {
        Ok(x.powi(z as i32))
    } else {
        Ok(x.powf(z))
    }
}

impl ScoreComponents {
    pub fn combine(&self, cfg: &ScoringConfig) -> Result<f64, ScoreError> {
        Ok(factor("size", self.size, cfg.z1)?
            * factor("pagerank", self.pagerank, cfg.z2)?
            * factor("similarity", self.similarity, cfg.z3)?)
    }
}

/// Score of one valid subtree given its per-keyword paths.
pub fn tree_score<'a>(
    paths: impl IntoIterator<Item = &'a IndexedPath>,
    cfg: &ScoringConfig,
) -> Result<f64, ScoreError> {
    score_components(paths).combine(cfg)
}

/// Aggregates member scores, summing left to right.
pub fn pattern_score(member_scores: &[f64], aggregator: Aggregator) -> Result<f64, ScoreError> {
    if member_scores.is_empty() {
        return Err(ScoreError::EmptyPattern);
    }
    Ok(match aggregator {
        Aggregator::Sum => member_scores.iter().sum(),
        Aggregator::Avg => member_scores.iter().sum::<f64>() / member_scores.len() as f64,
        Aggregator::Max => member_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Aggregator::Count => member_scores.len() as f64,
    })
}

pub(crate) fn check_rate(rho: f64) -> Result<(), ScoreError> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(ScoreError::InvalidRate(rho))
    }
}

/// Horvitz-Thompson estimate of a sum score from Bernoulli(`rho`) sampled members.
pub fn pattern_score_estimate(sample_scores: &[f64], rho: f64) -> Result<f64, ScoreError> {
    check_rate(rho)?;
    Ok(sample_scores.iter().sum::<f64>() / rho)
}
