//! Bounded best-k buffers and lexicographic combination indexing.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::report::{rank_order, rank_order_parts, UtilityScore};

struct Entry(UtilityScore);

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Max-heap on report order: the heap top is the worst retained entry.
    fn cmp(&self, other: &Self) -> Ordering {
        rank_order(&self.0, &other.0)
    }
}

/// Keeps the `k` best scores seen so far under report order.
///
/// Report order is total, so the retained set does not depend on the order
/// in which candidates are offered or on how buffers are merged.
pub struct TopK {
    k: usize,
    heap: BinaryHeap<Entry>,
}

impl TopK {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            heap: BinaryHeap::with_capacity(k.min(1 << 16) + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Whether a candidate would currently be retained. Lets callers skip
    /// allocating index tuples for losers.
    #[inline]
    pub fn admits(&self, value: f64, indices: &[usize]) -> bool {
        if self.k == 0 {
            return false;
        }
        if self.heap.len() < self.k {
            return true;
        }
        let worst = &self.heap.peek().expect("non-empty").0;
        rank_order_parts(value, indices, worst.value, &worst.indices) == Ordering::Less
    }

    pub fn offer(&mut self, value: f64, indices: &[usize]) {
        if self.admits(value, indices) {
            self.push(UtilityScore::new(indices.to_vec(), value));
        }
    }

    pub fn push(&mut self, score: UtilityScore) {
        if self.k == 0 {
            return;
        }
        self.heap.push(Entry(score));
        if self.heap.len() > self.k {
            self.heap.pop();
        }
    }

    pub fn merge(mut self, other: TopK) -> TopK {
        debug_assert_eq!(self.k, other.k);
        if other.heap.len() > self.heap.len() {
            return other.merge(self);
        }
        for e in other.heap {
            self.push(e.0);
        }
        self
    }

    /// Retained scores, best first.
    pub fn into_sorted_vec(self) -> Vec<UtilityScore> {
        let mut v: Vec<UtilityScore> = self.heap.into_iter().map(|e| e.0).collect();
        v.sort_by(rank_order);
        v
    }
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// The `rank`-th (0-based) k-subset of {0..n} in lexicographic order.
pub fn unrank_combination(mut rank: u128, n: usize, k: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        let mut c = next;
        loop {
            let block = binomial(n - c - 1, k - slot - 1);
            if rank < block {
                break;
            }
            rank -= block;
            c += 1;
        }
        out.push(c);
        next = c + 1;
    }
    out
}
