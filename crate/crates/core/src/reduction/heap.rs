use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Entry {
    weight: f64,
    id: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Bounded max-heap keeping the `k` smallest `(weight, id)` pairs seen.
#[derive(Clone, Debug)]
pub struct NeighborHeap {
    k: usize,
    heap: BinaryHeap<Entry>,
}

impl NeighborHeap {
    pub fn new(k: usize) -> Self {
        NeighborHeap {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
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

    pub fn is_full(&self) -> bool {
        self.heap.len() >= self.k
    }

    /// Largest kept weight, if any.
    pub fn worst(&self) -> Option<(usize, f64)> {
        self.heap.peek().map(|e| (e.id, e.weight))
    }

    /// Inserts if the heap has room or `(weight, id)` beats the worst kept
    /// entry. Returns whether the entry was kept.
    pub fn insert(&mut self, id: usize, weight: f64) -> bool {
        if self.k == 0 {
            return false;
        }
        let entry = Entry { weight, id };
        if !self.is_full() {
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

    /// Consumes the heap, returning `(id, weight)` ascending by weight then id.
    pub fn into_sorted_vec(self) -> Vec<(usize, f64)> {
        self.heap
            .into_sorted_vec()
            .into_iter()
            .map(|e| (e.id, e.weight))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn keeps_k_smallest() {
        let mut h = NeighborHeap::new(3);
        for (id, w) in [(0, 5.0), (1, 1.0), (2, 4.0), (3, 2.0), (4, 9.0), (5, 0.5)] {
            h.insert(id, w);
        }
        assert_eq!(h.worst(), Some((3, 2.0)));
        assert_eq!(h.into_sorted_vec(), vec![(5, 0.5), (1, 1.0), (3, 2.0)]);
    }

    #[test]
    fn equal_weights_keep_smaller_id() {
        let mut h = NeighborHeap::new(1);
        assert!(h.insert(7, 1.0));
        assert!(!h.insert(9, 1.0));
        assert!(h.insert(2, 1.0));
        assert_eq!(h.into_sorted_vec(), vec![(2, 1.0)]);
    }

    #[test]
    fn zero_capacity_keeps_nothing() {
        let mut h = NeighborHeap::new(0);
        assert!(!h.insert(0, 0.0));
        assert!(h.is_empty());
        assert_eq!(h.worst(), None);
    }

    proptest! {
        #[test]
        fn matches_sorted_prefix(
            weights in proptest::collection::vec(0u8..20, 0..200),
            k in 1usize..30,
        ) {
            // small integer weights force plenty of ties
            let mut h = NeighborHeap::new(k);
            for (id, w) in weights.iter().enumerate() {
                h.insert(id, *w as f64);
                prop_assert!(h.len() <= k);
            }
            let mut expected: Vec<(usize, f64)> =
                weights.iter().enumerate().map(|(i, w)| (i, *w as f64)).collect();
            expected.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            expected.truncate(k);
            let worst = h.worst();
            let got = h.into_sorted_vec();
            prop_assert_eq!(worst, got.last().copied());
            prop_assert_eq!(got, expected);
        }
    }
}
