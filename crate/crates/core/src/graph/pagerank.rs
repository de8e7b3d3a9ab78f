use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EntityId, KnowledgeGraph};

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Nodes per rayon task; small graphs stay on the calling thread.
const PAR_CHUNK: usize = 4096;

/// Converged PageRank scores, one per entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRankVector {
    pub scores: Vec<f64>,
    pub damping: f64,
    pub tolerance: f64,
    pub iterations: u32,
}

impl PageRankVector {
    /// A constant vector, handy for reproducing hand-worked scores.
    pub fn uniform(n: usize, value: f64) -> Self {
        Self { scores: vec![value; n], damping: DEFAULT_DAMPING, tolerance: 0.0, iterations: 0 }
    }

    #[inline]
    pub fn get(&self, v: EntityId) -> f64 {
        self.scores[v.index()]
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Largest change one more application of the update rule would make.
    pub fn residual(&self, g: &KnowledgeGraph) -> f64 {
        let next = step(g, &self.scores, self.damping, &inverse_out_degrees(g));
        next.iter().zip(&self.scores).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn inverse_out_degrees(g: &KnowledgeGraph) -> Vec<f64> {
    (0..g.entity_count())
        .map(|i| match g.out_degree(EntityId(i as u32)) {
            0 => 0.0,
            d => 1.0 / d as f64,
        })
        .collect()
}

fn step(g: &KnowledgeGraph, pr: &[f64], damping: f64, inv_out: &[f64]) -> Vec<f64> {
    let n = pr.len();
    let base = (1.0 - damping) / n as f64;
    let node = |v: usize| {
        // in-edges are summed in insertion order so results do not depend on threading
        let mut acc = 0.0;
        for &e in g.in_edges(EntityId(v as u32)) {
            let u = g.edge(e).source.index();
            acc += pr[u] * inv_out[u];
        }
        base + damping * acc
    };
    if n >= 2 * PAR_CHUNK {
        (0..n).into_par_iter().with_min_len(PAR_CHUNK).map(node).collect()
    } else {
        (0..n).map(node).collect()
    }
}

/// Power iteration of `PR(v) ← (1−a)/|E| + a Σ_{(u,v)} PR(u)/OutDegree(u)`
/// from the uniform start `1/|E|`, until no score moves by `tolerance` or
/// more. Dangling mass is not redistributed, so scores need not sum to 1.
pub fn compute_pagerank(g: &KnowledgeGraph, damping: f64, tolerance: f64) -> PageRankVector {
    let n = g.entity_count();
    if n == 0 {
        return PageRankVector { scores: Vec::new(), damping, tolerance, iterations: 0 };
    }
    let inv_out = inverse_out_degrees(g);
    let mut pr = vec![1.0 / n as f64; n];
    let mut iterations = 0;
    loop {
        let next = step(g, &pr, damping, &inv_out);
        iterations += 1;
        let delta = next.iter().zip(&pr).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        // keep the iterate whose own residual is below tolerance
        if delta < tolerance {
            break;
        }
        pr = next;
    }
    PageRankVector { scores: pr, damping, tolerance, iterations }
}
