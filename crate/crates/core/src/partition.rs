//! Internal (friendly) partitions: verification, local search, and an
//! exhaustive check for small graphs.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::ColoringAssignment;
use crate::graph::Graph;
use crate::rng::{self, Purpose};
use crate::types::Color;

/// Largest graph the exhaustive check accepts.
pub const EXHAUSTIVE_LIMIT: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("partition has {got} entries, graph has {expected} vertices")]
    SizeMismatch { got: usize, expected: usize },
    #[error("exhaustive check supports at most {EXHAUSTIVE_LIMIT} vertices, got {0}")]
    TooLarge(usize),
    #[error("vertex {0} is uncolored")]
    Uncolored(usize),
}

/// Two-class partition; `in_a[v]` tells the class of `v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    in_a: Vec<bool>,
}

impl Partition {
    pub fn new(in_a: Vec<bool>) -> Self {
        Partition { in_a }
    }

    /// Red vertices form class A.
    pub fn from_coloring(c: &ColoringAssignment) -> Result<Self, PartitionError> {
        let mut in_a = Vec::with_capacity(c.len());
        for v in 0..c.len() {
            match c.color(v) {
                Color::Red => in_a.push(true),
                Color::Blue => in_a.push(false),
                Color::Uncolored => return Err(PartitionError::Uncolored(v)),
            }
        }
        Ok(Partition { in_a })
    }

    pub fn len(&self) -> usize {
        self.in_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.in_a.is_empty()
    }

    pub fn in_a(&self, v: usize) -> bool {
        self.in_a[v]
    }

    /// `(|A|, |B|)`.
    pub fn class_sizes(&self) -> (usize, usize) {
        let a = self.in_a.iter().filter(|&&x| x).count();
        (a, self.in_a.len() - a)
    }

    /// The same partition with the class labels exchanged.
    pub fn swapped(&self) -> Self {
        Partition {
            in_a: self.in_a.iter().map(|&x| !x).collect(),
        }
    }

    fn own_other(&self, g: &Graph, v: usize) -> (usize, usize) {
        let own = g.neighbors(v).iter().filter(|&&w| self.in_a[w as usize] == self.in_a[v]).count();
        (own, g.neighbors(v).len() - own)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub vertex: usize,
    pub own: usize,
    pub other: usize,
}

/// Certificate for one partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InternalCheck {
    pub ok: bool,
    pub empty_class: bool,
    pub class_sizes: (usize, usize),
    pub violations: Vec<Violation>,
}

/// Both classes nonempty and every vertex has at least as many neighbors in
/// its own class as in the other.
pub fn check_internal(g: &Graph, p: &Partition) -> Result<InternalCheck, PartitionError> {
    if p.len() != g.n() {
        return Err(PartitionError::SizeMismatch {
            got: p.len(),
            expected: g.n(),
        });
    }
    let class_sizes = p.class_sizes();
    let empty_class = class_sizes.0 == 0 || class_sizes.1 == 0;
    let violations: Vec<Violation> = (0..g.n())
        .filter_map(|v| {
            let (own, other) = p.own_other(g, v);
            (own < other).then_some(Violation { vertex: v, own, other })
        })
        .collect();
    Ok(InternalCheck {
        ok: !empty_class && violations.is_empty(),
        empty_class,
        class_sizes,
        violations,
    })
}

/// Moves violated vertices across until none is left. Each move lowers the
/// cut by `other - own >= 1`, so at most `cut` moves happen; vertices are
/// taken in a seeded random order, largest violation first. A move that
/// would empty a class is skipped. Returns a verified internal partition,
/// or `None` when only such moves remain or `max_moves` runs out.
pub fn internal_search(g: &Graph, start: &Partition, max_moves: usize, seed: u64) -> Result<Option<Partition>, PartitionError> {
    let check = check_internal(g, start)?;
    if check.ok {
        return Ok(Some(start.clone()));
    }
    if check.empty_class {
        return Ok(None);
    }
    let mut p = start.clone();
    let mut rng = rng::stream(seed, Purpose::InternalSearch, g.n() as u64);
    let (mut size_a, mut size_b) = p.class_sizes();
    let mut own: Vec<usize> = (0..g.n()).map(|v| p.own_other(g, v).0).collect();
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.shuffle(&mut rng);
    let mut rank = vec![0usize; g.n()];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    // (violation, random rank) max-heap; stale entries are skipped on pop
    let mut heap: BinaryHeap<(usize, Reverse<usize>, usize)> = BinaryHeap::new();
    let violation = |v: usize, own: &[usize]| (g.neighbors(v).len() - own[v]).saturating_sub(own[v]);
    for v in 0..g.n() {
        let x = violation(v, &own);
        if x > 0 {
            heap.push((x, Reverse(rank[v]), v));
        }
    }
    let mut moves = 0;
    while let Some((x, _, v)) = heap.pop() {
        if violation(v, &own) != x {
            continue;
        }
        let last = if p.in_a[v] { size_a == 1 } else { size_b == 1 };
        if last {
            continue;
        }
        if moves == max_moves {
            break;
        }
        moves += 1;
        if p.in_a[v] {
            size_a -= 1;
            size_b += 1;
        } else {
            size_a += 1;
            size_b -= 1;
        }
        p.in_a[v] = !p.in_a[v];
        own[v] = g.neighbors(v).len() - own[v];
        for &w in g.neighbors(v) {
            let w = w as usize;
            if p.in_a[w] == p.in_a[v] {
                own[w] += 1;
            } else {
                own[w] -= 1;
            }
            let y = violation(w, &own);
            if y > 0 {
                heap.push((y, Reverse(rank[w]), w));
            }
        }
    }
    let check = check_internal(g, &p)?;
    Ok(check.ok.then_some(p))
}

/// Exhaustive search over all bipartitions with vertex 0 in class A.
pub fn exhaustive_internal_partition(g: &Graph) -> Result<Option<Partition>, PartitionError> {
    let n = g.n();
    if n > EXHAUSTIVE_LIMIT {
        return Err(PartitionError::TooLarge(n));
    }
    if n < 2 {
        return Ok(None);
    }
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
        .collect();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    for rest in 0u32..(1u32 << (n - 1)) {
        let a = 1 | rest << 1;
        if a == full {
            continue;
        }
        let ok = (0..n).all(|v| {
            let same = if a >> v & 1 == 1 { a } else { full & !a };
            let own = (adj[v] & same).count_ones();
            2 * own >= adj[v].count_ones()
        });
        if ok {
            return Ok(Some(Partition {
                in_a: (0..n).map(|v| a >> v & 1 == 1).collect(),
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures;

    fn split(n: usize, a: &[usize]) -> Partition {
        Partition::new((0..n).map(|v| a.contains(&v)).collect())
    }

    #[test]
    fn k4_two_two_split_fails() {
        let g = fixtures::complete(4);
        let c = check_internal(&g, &split(4, &[0, 1])).unwrap();
        assert!(!c.ok);
        assert_eq!(c.violations.len(), 4);
        assert_eq!((c.violations[0].own, c.violations[0].other), (1, 2));
    }

    #[test]
    fn c4_adjacent_pairs_are_internal() {
        let g = fixtures::cycle(4);
        let c = check_internal(&g, &split(4, &[0, 1])).unwrap();
        assert!(c.ok);
        assert!(c.violations.is_empty());
    }

    #[test]
    fn k33_sides_fail() {
        let g = fixtures::complete_bipartite(3);
        let c = check_internal(&g, &split(6, &[0, 1, 2])).unwrap();
        assert!(!c.ok);
        assert!(c.violations.iter().all(|v| v.own == 0 && v.other == 3));
    }

    #[test]
    fn empty_class_is_flagged() {
        let g = fixtures::cycle(4);
        let c = check_internal(&g, &split(4, &[0, 1, 2, 3])).unwrap();
        assert!(!c.ok && c.empty_class);
        assert!(c.violations.is_empty());
    }

    #[test]
    fn check_is_symmetric() {
        let g = fixtures::petersen();
        for mask in [0b1010101010usize, 0b1111100000, 0b0000011111, 0b1100110011] {
            let p = Partition::new((0..10).map(|v| mask >> v & 1 == 1).collect());
            assert_eq!(check_internal(&g, &p).unwrap().ok, check_internal(&g, &p.swapped()).unwrap().ok);
        }
    }

    #[test]
    fn exhaustive_fixtures() {
        assert_eq!(exhaustive_internal_partition(&fixtures::complete(4)).unwrap(), None);
        assert_eq!(exhaustive_internal_partition(&fixtures::complete_bipartite(3)).unwrap(), None);
        let p = exhaustive_internal_partition(&fixtures::cycle(4)).unwrap().unwrap();
        assert!(check_internal(&fixtures::cycle(4), &p).unwrap().ok);
        let pet = exhaustive_internal_partition(&fixtures::petersen()).unwrap().unwrap();
        assert!(check_internal(&fixtures::petersen(), &pet).unwrap().ok);
    }

    #[test]
    fn search_results_are_verified() {
        let g = fixtures::complete(4);
        assert_eq!(internal_search(&g, &split(4, &[0, 1]), 1000, 1).unwrap(), None);
        let c8 = fixtures::cycle(8);
        let good = split(8, &[0, 1, 2, 3]);
        assert_eq!(internal_search(&c8, &good, 10, 1).unwrap(), Some(good));
        let alternating = split(8, &[0, 2, 4, 6]);
        let found = internal_search(&c8, &alternating, 1000, 1).unwrap().unwrap();
        assert!(check_internal(&c8, &found).unwrap().ok);
    }
}
