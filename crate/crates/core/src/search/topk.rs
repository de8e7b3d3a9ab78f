use std::cmp::Ordering;
use std::collections::BinaryHeap;

struct Ranked<K, V> {
    score: f64,
    key: K,
    value: V,
}

// "greater" means worse, so the max-heap top is the entry to evict
impl<K: Ord, V> Ord for Ranked<K, V> {
    fn cmp(&self, other: &Self) -> Ordering {
        other.score.total_cmp(&self.score).then_with(|| self.key.cmp(&other.key))
    }
}

impl<K: Ord, V> PartialOrd for Ranked<K, V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<K: Ord, V> PartialEq for Ranked<K, V> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<K: Ord, V> Eq for Ranked<K, V> {}

/// Keeps the `k` best entries by score descending, then key ascending.
pub struct TopKQueue<K, V> {
    capacity: usize,
    heap: BinaryHeap<Ranked<K, V>>,
}

impl<K: Ord, V> TopKQueue<K, V> {
    pub fn new(capacity: usize) -> Self {
        Self { capacity, heap: BinaryHeap::with_capacity(capacity.min(1024) + 1) }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Offers an entry; returns whether it was kept.
    pub fn push(&mut self, score: f64, key: K, value: V) -> bool {
        let entry = Ranked { score, key, value };
        if self.heap.len() < self.capacity {
            self.heap.push(entry);
            return true;
        }
        match self.heap.peek() {
            Some(worst) if entry < *worst => {
                self.heap.pop();
                self.heap.push(entry);
                true
            }
            _ => false,
        }
    }

    /// Entries best first.
    pub fn into_sorted(self) -> Vec<(f64, K, V)> {
        self.heap.into_sorted_vec().into_iter().map(|r| (r.score, r.key, r.value)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn keeps_best_with_key_tiebreak() {
        let mut q = TopKQueue::new(2);
        q.push(1.0, "c", ());
        q.push(2.0, "b", ());
        q.push(2.0, "a", ());
        q.push(0.5, "d", ());
        let keys: Vec<_> = q.into_sorted().into_iter().map(|(_, k, _)| k).collect();
        assert_eq!(keys, vec!["a", "b"]);
    }

    #[test]
    fn zero_capacity_keeps_nothing() {
        let mut q = TopKQueue::new(0);
        assert!(!q.push(1.0, 1, ()));
        assert!(q.is_empty());
    }

    proptest! {
        #[test]
        fn matches_full_sort(items in proptest::collection::vec((0u8..10, 0u32..50), 0..60), k in 1usize..12) {
            let mut q = TopKQueue::new(k);
            for &(s, key) in &items {
                q.push(s as f64, key, ());
            }
            let got: Vec<_> = q.into_sorted().into_iter().map(|(s, key, _)| (s, key)).collect();
            let mut all: Vec<_> = items.iter().map(|&(s, key)| (s as f64, key)).collect();
            all.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            all.truncate(k);
            prop_assert_eq!(got, all);
        }
    }
}
