use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;

use super::{
    for_each_product, forms_tree, Enumeration, Query, SamplingConfig, ScoredPattern, SearchOutcome, SearchStats,
    TopKQueue, TreePattern, TypeStats, ValidSubtree,
};
use crate::error::{ScoreError, SearchError};
use crate::graph::{EntityId, EntityTypeId};
use crate::index::{IndexedPath, PathIndex, Span, WordBlock};
use crate::scoring::{check_rate, pattern_score, pattern_score_estimate, tree_score, Aggregator, ScoringConfig};

/// Pattern ids, one per keyword. Ordering matches [`TreePattern`] ordering.
pub(super) type Key = SmallVec<[u32; 4]>;

/// Members of one pattern as positions into each word's path run.
#[derive(Debug, Default)]
pub(super) struct Acc {
    roots: Vec<EntityId>,
    picks: Vec<Key>,
    scores: Vec<f64>,
}

impl Acc {
    pub(super) fn push(&mut self, root: EntityId, picks: Key, score: f64) {
        self.roots.push(root);
        self.picks.push(picks);
        self.scores.push(score);
    }

    pub(super) fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub(super) fn scores(&self) -> &[f64] {
        &self.scores
    }
}

pub(super) fn word_blocks<'a>(idx: &'a PathIndex, q: &Query) -> Option<Vec<&'a WordBlock>> {
    q.keywords().iter().map(|w| idx.block(w)).collect()
}

pub(super) fn tree_pattern(blocks: &[&WordBlock], key: &[u32]) -> TreePattern {
    TreePattern::new(blocks.iter().zip(key).map(|(b, &pid)| b.pattern(pid).clone()).collect())
}

pub(super) fn materialize(
    blocks: &[&WordBlock],
    layout: fn(&WordBlock) -> &[IndexedPath],
    key: &[u32],
    acc: Acc,
    estimated_score: Option<f64>,
    score: f64,
) -> ScoredPattern {
    let subtrees: Vec<ValidSubtree> = acc
        .roots
        .iter()
        .zip(&acc.picks)
        .map(|(&root, picks)| ValidSubtree {
            root,
            paths: blocks.iter().zip(picks).map(|(b, &at)| layout(b)[at as usize].clone()).collect(),
        })
        .collect();
    ScoredPattern {
        pattern: tree_pattern(blocks, key),
        score,
        estimated_score,
        subtree_count: subtrees.len(),
        subtrees,
    }
}

pub(super) fn candidate_roots(blocks: &[&WordBlock]) -> Vec<EntityId> {
    let mut roots: Vec<EntityId> = blocks[0].root_entries().iter().map(|&(r, _)| r).collect();
    for b in &blocks[1..] {
        let other = b.root_entries();
        roots.retain(|r| other.binary_search_by_key(r, |&(x, _)| x).is_ok());
    }
    roots
}

fn group_by_type(idx: &PathIndex, roots: &[EntityId]) -> Vec<(EntityTypeId, Vec<EntityId>)> {
    let mut sorted = roots.to_vec();
    sorted.sort_by_key(|&r| (idx.entity_type(r), r));
    let mut out: Vec<(EntityTypeId, Vec<EntityId>)> = Vec::new();
    for r in sorted {
        let ty = idx.entity_type(r);
        match out.last_mut() {
            Some((t, rs)) if *t == ty => rs.push(r),
            _ => out.push((ty, vec![r])),
        }
    }
    out
}

fn upper_bound(blocks: &[&WordBlock], roots: &[EntityId]) -> u64 {
    roots
        .iter()
        .map(|&r| blocks.iter().map(|b| b.path_count_at_root(r) as u64).fold(1u64, u64::saturating_mul))
        .fold(0u64, u64::saturating_add)
}

/// Enumerates the valid subtrees under `root`: pattern product, then path
/// product per pattern combination, keeping tuples that form a tree.
fn expand_root(
    blocks: &[&WordBlock],
    root: EntityId,
    cfg: Option<&ScoringConfig>,
    filter: Option<&HashSet<Key>>,
    dict: &mut HashMap<Key, Acc>,
    ts: &mut TypeStats,
) -> Result<(), ScoreError> {
    let runs: SmallVec<[&[(u32, Span)]; 4]> = blocks.iter().map(|b| b.patterns_at_root(root)).collect();
    let lens: SmallVec<[usize; 4]> = runs.iter().map(|r| r.len()).collect();
    for_each_product(&lens, |pat_at| {
        let key: Key = runs.iter().zip(pat_at).map(|(run, &j)| run[j].0).collect();
        if filter.is_some_and(|f| !f.contains(&key)) {
            return Ok(());
        }
        let spans: SmallVec<[Span; 4]> = runs.iter().zip(pat_at).map(|(run, &j)| run[j].1).collect();
        let path_lens: SmallVec<[usize; 4]> = spans.iter().map(|s| s.len()).collect();
        let mut found: Vec<(Key, f64)> = Vec::new();
        for_each_product(&path_lens, |path_at| {
            let picks: Key = spans.iter().zip(path_at).map(|(s, &j)| s.start + j as u32).collect();
            let paths = blocks.iter().zip(&picks).map(|(b, &at)| &b.rf_paths()[at as usize]);
            if !forms_tree(paths.clone()) {
                ts.rejected += 1;
                return Ok(());
            }
            ts.accepted += 1;
            let score = match cfg {
                Some(cfg) => tree_score(paths, cfg)?,
                None => 0.0,
            };
            found.push((picks, score));
            Ok(())
        })?;
        if !found.is_empty() {
            let acc = dict.entry(key).or_default();
            for (picks, score) in found {
                acc.push(root, picks, score);
            }
        }
        Ok(())
    })
}

fn new_type_stats(ty: EntityTypeId, blocks: &[&WordBlock], roots: &[EntityId]) -> TypeStats {
    TypeStats {
        root_type: ty,
        candidate_roots: roots.len(),
        upper_bound: upper_bound(blocks, roots),
        accepted: 0,
        rejected: 0,
        rate: 1.0,
        selected_roots: 0,
    }
}

/// One root type: decide the rate, sample roots, expand them.
fn sample_type(
    blocks: &[&WordBlock],
    ty: EntityTypeId,
    roots: &[EntityId],
    cfg: &ScoringConfig,
    sampling: &SamplingConfig,
) -> Result<(HashMap<Key, Acc>, TypeStats), ScoreError> {
    let mut ts = new_type_stats(ty, blocks, roots);
    if sampling.lambda.is_some_and(|l| ts.upper_bound >= l) {
        ts.rate = sampling.rho;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    rng.set_stream(ty.0 as u64);
    let mut dict = HashMap::new();
    for &r in roots {
        if ts.rate < 1.0 && rng.random::<f64>() >= ts.rate {
            continue;
        }
        ts.selected_roots += 1;
        expand_root(blocks, r, Some(cfg), None, &mut dict, &mut ts)?;
    }
    Ok((dict, ts))
}

fn estimate(acc: &Acc, rate: f64, aggregator: Aggregator) -> Result<f64, ScoreError> {
    if rate < 1.0 {
        pattern_score_estimate(acc.scores(), rate)
    } else {
        pattern_score(acc.scores(), aggregator)
    }
}

fn check_sampling(cfg: &ScoringConfig, sampling: &SamplingConfig) -> Result<(), ScoreError> {
    check_rate(sampling.rho)?;
    if sampling.rho < 1.0 && sampling.lambda.is_some() && cfg.aggregator != Aggregator::Sum {
        return Err(ScoreError::UnsupportedAggregator(cfg.aggregator.name()));
    }
    Ok(())
}

/// Top-k patterns, partitioned by root type, sampling roots of a type when its
/// subtree upper bound reaches `lambda`.
///
/// Per type the best `k` patterns by estimate are rescored exactly over all
/// candidate roots of that type; unsampled types are exact already.
pub fn search_linear_topk(
    idx: &PathIndex,
    q: &Query,
    cfg: &ScoringConfig,
    sampling: &SamplingConfig,
) -> Result<SearchOutcome, SearchError> {
    check_sampling(cfg, sampling)?;
    let mut stats = SearchStats::default();
    let Some(blocks) = word_blocks(idx, q) else {
        return Ok(SearchOutcome { patterns: Vec::new(), stats });
    };
    let roots = candidate_roots(&blocks);
    stats.candidate_roots = roots.len();

    let mut global: TopKQueue<Key, (Acc, Option<f64>)> = TopKQueue::new(q.k());
    for (ty, troots) in group_by_type(idx, &roots) {
        let (dict, ts) = sample_type(&blocks, ty, &troots, cfg, sampling)?;
        let mut local = TopKQueue::new(q.k());
        for (key, acc) in dict {
            let est = estimate(&acc, ts.rate, cfg.aggregator)?;
            local.push(est, key, acc);
        }
        let survivors = local.into_sorted();
        if ts.rate < 1.0 {
            let keep: HashSet<Key> = survivors.iter().map(|(_, k, _)| k.clone()).collect();
            let mut exact = HashMap::new();
            let mut rescore = new_type_stats(ty, &blocks, &troots);
            for &r in &troots {
                expand_root(&blocks, r, Some(cfg), Some(&keep), &mut exact, &mut rescore)?;
            }
            for (est, key, _) in survivors {
                let acc = exact.remove(&key).expect("sampled pattern has members");
                let score = pattern_score(acc.scores(), cfg.aggregator)?;
                global.push(score, key, (acc, Some(est)));
            }
        } else {
            for (score, key, acc) in survivors {
                global.push(score, key, (acc, None));
            }
        }
        stats.accepted += ts.accepted;
        stats.rejected += ts.rejected;
        stats.per_type.push(ts);
    }
    stats.log_rejections("linear-topk");
    let patterns = global
        .into_sorted()
        .into_iter()
        .map(|(score, key, (acc, est))| materialize(&blocks, WordBlock::rf_paths, &key, acc, est, score))
        .collect();
    Ok(SearchOutcome { patterns, stats })
}

/// Estimated scores of every pattern found for root type `root_type` under
/// `sampling`, in pattern order. Exact scores when the type is not sampled.
pub fn estimate_type_scores(
    idx: &PathIndex,
    q: &Query,
    root_type: EntityTypeId,
    cfg: &ScoringConfig,
    sampling: &SamplingConfig,
) -> Result<Vec<(TreePattern, f64)>, SearchError> {
    check_sampling(cfg, sampling)?;
    let Some(blocks) = word_blocks(idx, q) else {
        return Ok(Vec::new());
    };
    let roots: Vec<EntityId> =
        candidate_roots(&blocks).into_iter().filter(|&r| idx.entity_type(r) == root_type).collect();
    let (dict, ts) = sample_type(&blocks, root_type, &roots, cfg, sampling)?;
    let mut out = dict
        .iter()
        .map(|(key, acc)| Ok((key.clone(), estimate(acc, ts.rate, cfg.aggregator)?)))
        .collect::<Result<Vec<_>, ScoreError>>()?;
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out.into_iter().map(|(key, s)| (tree_pattern(&blocks, &key), s)).collect())
}

/// Every pattern with all of its valid subtrees, by expanding each candidate
/// root once. No scoring and no truncation.
pub fn search_linear_enum(idx: &PathIndex, q: &Query) -> Enumeration {
    let mut stats = SearchStats::default();
    let Some(blocks) = word_blocks(idx, q) else {
        return Enumeration { groups: Vec::new(), stats };
    };
    let roots = candidate_roots(&blocks);
    stats.candidate_roots = roots.len();
    let mut all: Vec<(Key, Acc)> = Vec::new();
    for (ty, troots) in group_by_type(idx, &roots) {
        let mut ts = new_type_stats(ty, &blocks, &troots);
        ts.selected_roots = troots.len();
        let mut dict = HashMap::new();
        for &r in &troots {
            expand_root(&blocks, r, None, None, &mut dict, &mut ts).expect("unscored expansion cannot fail");
        }
        all.extend(dict);
        stats.accepted += ts.accepted;
        stats.rejected += ts.rejected;
        stats.per_type.push(ts);
    }
    stats.log_rejections("linear-enum");
    all.sort_by(|a, b| a.0.cmp(&b.0));
    let groups = all
        .into_iter()
        .map(|(key, acc)| {
            let sp = materialize(&blocks, WordBlock::rf_paths, &key, acc, None, 0.0);
            (sp.pattern, sp.subtrees)
        })
        .collect();
    Enumeration { groups, stats }
}
