use std::collections::BTreeMap;

use smallvec::SmallVec;

use super::linear::{candidate_roots, materialize, word_blocks, Acc, Key};
use super::{for_each_product, forms_tree, Query, SearchOutcome, SearchStats, TopKQueue};
use crate::error::SearchError;
use crate::graph::{EntityId, EntityTypeId};
use crate::index::{PathIndex, Span, WordBlock};
use crate::scoring::{pattern_score, tree_score, ScoringConfig};

fn patterns_by_root_type(block: &WordBlock) -> BTreeMap<EntityTypeId, Vec<u32>> {
    let mut out: BTreeMap<EntityTypeId, Vec<u32>> = BTreeMap::new();
    for (pid, p) in block.patterns().iter().enumerate() {
        out.entry(p.root_type()).or_default().push(pid as u32);
    }
    out
}

/// Top-k by enumerating pattern combinations per root type and joining the
/// root lists of each combination.
pub fn search_pattern_enum(idx: &PathIndex, q: &Query, cfg: &ScoringConfig) -> Result<SearchOutcome, SearchError> {
    let mut stats = SearchStats::default();
    let Some(blocks) = word_blocks(idx, q) else {
        return Ok(SearchOutcome { patterns: Vec::new(), stats });
    };
    let by_type: Vec<_> = blocks.iter().map(|b| patterns_by_root_type(b)).collect();
    let mut queue: TopKQueue<Key, Acc> = TopKQueue::new(q.k());

    for (ty, first) in &by_type[0] {
        let Some(lists) = std::iter::once(Some(first))
            .chain(by_type[1..].iter().map(|m| m.get(ty)))
            .collect::<Option<Vec<&Vec<u32>>>>()
        else {
            continue;
        };
        let lens: SmallVec<[usize; 4]> = lists.iter().map(|l| l.len()).collect();
        for_each_product::<SearchError>(&lens, |at| {
            stats.combinations += 1;
            let key: Key = lists.iter().zip(at).map(|(l, &j)| l[j]).collect();

            let mut joined: Vec<(EntityId, SmallVec<[Span; 4]>)> =
                blocks[0].roots_of_pattern(key[0]).iter().map(|&(r, s)| (r, SmallVec::from_elem(s, 1))).collect();
            for (b, &pid) in blocks.iter().zip(&key).skip(1) {
                let runs = b.roots_of_pattern(pid);
                joined.retain_mut(|(r, spans)| match runs.binary_search_by_key(r, |&(x, _)| x) {
                    Ok(i) => {
                        spans.push(runs[i].1);
                        true
                    }
                    Err(_) => false,
                });
                if joined.is_empty() {
                    break;
                }
            }
            if joined.is_empty() {
                stats.empty_combinations += 1;
                return Ok(());
            }

            let mut acc = Acc::default();
            for (root, spans) in joined {
                let path_lens: SmallVec<[usize; 4]> = spans.iter().map(|s| s.len()).collect();
                for_each_product(&path_lens, |path_at| {
                    let picks: Key = spans.iter().zip(path_at).map(|(s, &j)| s.start + j as u32).collect();
                    let paths = blocks.iter().zip(&picks).map(|(b, &p)| &b.pf_paths()[p as usize]);
                    if !forms_tree(paths.clone()) {
                        stats.rejected += 1;
                        return Ok(());
                    }
                    stats.accepted += 1;
                    let score = tree_score(paths, cfg)?;
                    acc.push(root, picks, score);
                    Ok::<_, SearchError>(())
                })?;
            }
            if !acc.is_empty() {
                let score = pattern_score(acc.scores(), cfg.aggregator)?;
                queue.push(score, key, acc);
            }
            Ok(())
        })?;
    }
    stats.candidate_roots = candidate_roots(&blocks).len();
    stats.log_rejections("pattern-enum");
    let patterns = queue
        .into_sorted()
        .into_iter()
        .map(|(score, key, acc)| materialize(&blocks, WordBlock::pf_paths, &key, acc, None, score))
        .collect();
    Ok(SearchOutcome { patterns, stats })
}
