//! Lazy-forward priority queue.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::model::NodeId;

/// A candidate with its last computed gain and the step at which it was computed.
///
/// Ordered by gain descending, then node id ascending, so the heap top is the argmax with
/// ties going to the smallest id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CelfEntry {
    pub node: NodeId,
    /// Gain summed over the batch samples; an upper bound once stale.
    pub cached_gain: u64,
    pub computed_at: u32,
}

impl CelfEntry {
    pub fn is_fresh(&self, step: u32) -> bool {
        self.computed_at == step
    }
}

impl Ord for CelfEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cached_gain
            .cmp(&other.cached_gain)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for CelfEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lazy greedy selection over gains that never increase from one step to the next.
#[derive(Clone, Debug, Default)]
pub struct CelfQueue {
    heap: BinaryHeap<CelfEntry>,
    evaluations: u64,
}

impl CelfQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Queue seeded with gains computed at step 0.
    pub fn from_gains(gains: impl IntoIterator<Item = (NodeId, u64)>) -> Self {
        let heap: BinaryHeap<CelfEntry> = gains
            .into_iter()
            .map(|(node, cached_gain)| CelfEntry {
                node,
                cached_gain,
                computed_at: 0,
            })
            .collect();
        CelfQueue {
            evaluations: heap.len() as u64,
            heap,
        }
    }

    pub fn push(&mut self, entry: CelfEntry) {
        self.heap.push(entry);
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Pops the argmax for `step`. Entries for which `keep` is false are discarded; stale
    /// entries are re-scored with `gain` and pushed back.
    pub fn select<K, G>(&mut self, step: u32, mut keep: K, mut gain: G) -> Option<CelfEntry>
    where
        K: FnMut(NodeId) -> bool,
        G: FnMut(NodeId) -> u64,
    {
        while let Some(top) = self.heap.pop() {
            if !keep(top.node) {
                continue;
            }
            if top.is_fresh(step) {
                return Some(top);
            }
            self.evaluations += 1;
            self.heap.push(CelfEntry {
                node: top.node,
                cached_gain: gain(top.node),
                computed_at: step,
            });
        }
        None
    }
}
