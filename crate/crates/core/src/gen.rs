//! Synthetic graph generator.
//!
//! Entities get a uniform type, a Poisson number of outgoing edges with
//! uniform attribute types, and descriptions drawn from a Zipf distribution
//! over `w1 … wV` (rank 1 most frequent). About one edge in ten points to a
//! fresh literal instead of an entity. Type and attribute names carry one
//! vocabulary word each (`C3_w17`, `a5_w2`) so keywords can also hit them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, Zipf};
use serde::{Deserialize, Serialize};

use crate::graph::{EdgeTarget, GraphRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub entities: usize,
    pub types: usize,
    pub attrs: usize,
    pub avg_out_degree: f64,
    pub vocabulary: usize,
    pub words_per_text: usize,
    /// Zipf exponent of the word distribution.
    pub zipf_exponent: f64,
    /// Share of edges that end in a literal value.
    pub literal_fraction: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            entities: 1000,
            types: 10,
            attrs: 20,
            avg_out_degree: 3.0,
            vocabulary: 500,
            words_per_text: 3,
            zipf_exponent: 1.0,
            literal_fraction: 0.1,
            seed: 0,
        }
    }
}

impl GenConfig {
    fn validate(&self) {
        assert!(self.entities > 0 && self.types > 0 && self.attrs > 0, "counts must be positive");
        assert!(self.vocabulary > 0 && self.words_per_text > 0, "text settings must be positive");
        assert!(self.avg_out_degree > 0.0 && self.zipf_exponent > 0.0, "rates must be positive");
        assert!((0.0..=1.0).contains(&self.literal_fraction), "literal fraction must lie in [0, 1]");
    }
}

struct Words {
    zipf: Zipf<f64>,
}

impl Words {
    fn new(cfg: &GenConfig) -> Self {
        Self { zipf: Zipf::new(cfg.vocabulary as f64, cfg.zipf_exponent).expect("valid Zipf parameters") }
    }

    fn word(&self, rng: &mut ChaCha8Rng) -> String {
        format!("w{}", self.zipf.sample(rng) as u64)
    }

    fn text(&self, rng: &mut ChaCha8Rng, n: usize) -> String {
        (0..n).map(|_| self.word(rng)).collect::<Vec<_>>().join(" ")
    }
}

/// Graph records for `cfg`; identical for identical configurations.
///
/// # Panics
///
/// On non-positive counts or rates.
pub fn generate_records(cfg: &GenConfig) -> Vec<GraphRecord> {
    cfg.validate();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let words = Words::new(cfg);
    let type_names: Vec<String> = (0..cfg.types).map(|i| format!("C{i}_{}", words.word(&mut rng))).collect();
    let attr_names: Vec<String> = (0..cfg.attrs).map(|i| format!("a{i}_{}", words.word(&mut rng))).collect();
    let key = |i: usize| format!("e{i}");

    let mut out = Vec::with_capacity(cfg.entities * (1 + cfg.avg_out_degree.ceil() as usize));
    for i in 0..cfg.entities {
        out.push(GraphRecord::Entity {
            key: key(i),
            type_name: type_names[rng.random_range(0..cfg.types)].clone(),
            text: words.text(&mut rng, cfg.words_per_text),
        });
    }
    let degree = Poisson::new(cfg.avg_out_degree).expect("positive degree");
    for i in 0..cfg.entities {
        let n = degree.sample(&mut rng) as usize;
        for _ in 0..n {
            let attr = attr_names[rng.random_range(0..cfg.attrs)].clone();
            let target = if rng.random::<f64>() < cfg.literal_fraction {
                let len = rng.random_range(1..=2);
                EdgeTarget::Literal(words.text(&mut rng, len))
            } else {
                EdgeTarget::Entity(key(rng.random_range(0..cfg.entities)))
            };
            out.push(GraphRecord::Edge { source: key(i), attr, target });
        }
    }
    out
}

/// The generated graph in the line-delimited graph file format.
pub fn generate_graph(cfg: &GenConfig) -> String {
    let mut s = String::new();
    for r in generate_records(cfg) {
        s.push_str(&r.to_line());
        s.push('\n');
    }
    s
}
