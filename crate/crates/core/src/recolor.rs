//! Terminal recoloring: find vertices that sit against the majority of
//! their neighborhood, pick a balanced independent set of them and flip it.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashSet};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{cut_size, vertex_type, ColoringAssignment, ColoringError};
use crate::graph::Graph;
use crate::rng::{self, Purpose};
use crate::types::Color;

/// Largest conflict graph accepted by the exact search.
pub const EXACT_LIMIT: usize = 30;
pub const GREEDY_RESTARTS: usize = 8;

#[derive(Debug, Error)]
pub enum RecolorError {
    #[error("exact search supports at most {EXACT_LIMIT} vertices, got {0}")]
    ExactTooLarge(usize),
    #[error("swap set is unbalanced: {red} red vs {blue} blue")]
    Unbalanced { red: usize, blue: usize },
    #[error("swap set is not independent: {0} and {1} conflict")]
    NotIndependent(usize, usize),
    #[error("vertex {v} does not have color {expected:?}")]
    WrongColor { v: usize, expected: Color },
    #[error("vertex {0} appears twice in the swap set")]
    Duplicate(usize),
    #[error("flipping vertex {0} would not improve the cut")]
    NotImproving(usize),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
}

/// Which vertices qualify for a swap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// Strictly more than `d/2` neighbors in the class being joined.
    Terminal,
    /// Colored at an asymmetric step, with exactly `floor(d/2) + 1`
    /// neighbors favoring the flip.
    Strict,
}

impl std::str::FromStr for Criterion {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "terminal" => Ok(Criterion::Terminal),
            "strict" => Ok(Criterion::Strict),
            other => Err(format!("unknown criterion `{other}` (expected terminal|strict)")),
        }
    }
}

/// Whether flips should shrink (bisection) or grow (max-cut) the cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Greedy,
    Exact,
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greedy" => Ok(Strategy::Greedy),
            "exact" => Ok(Strategy::Exact),
            other => Err(format!("unknown strategy `{other}` (expected greedy|exact)")),
        }
    }
}

/// Number of neighbors of `v` in the class a flip of `v` would leave
/// (`own`) and join (`other`).
fn own_other(g: &Graph, colors: &[Color], v: usize) -> (usize, usize) {
    let ty = vertex_type(g, colors, v);
    match colors[v] {
        Color::Red => (ty.red as usize, ty.blue as usize),
        Color::Blue => (ty.blue as usize, ty.red as usize),
        Color::Uncolored => (0, 0),
    }
}

/// Count of neighbors that favor a flip in `direction`: the other class
/// when minimizing, the own class when maximizing.
fn favoring(own: usize, other: usize, direction: Direction) -> usize {
    match direction {
        Direction::Minimize => other,
        Direction::Maximize => own,
    }
}

/// Red and blue candidates for flipping.
pub fn miscolored_sets(
    g: &Graph,
    coloring: &ColoringAssignment,
    criterion: Criterion,
    direction: Direction,
) -> (Vec<usize>, Vec<usize>) {
    let colors = coloring.colors();
    let d = g.d();
    let qualifies = |v: usize| {
        let (own, other) = own_other(g, &colors, v);
        let k = favoring(own, other, direction);
        match criterion {
            Criterion::Terminal => 2 * k > d,
            Criterion::Strict => coloring.record(v).strict && k == d / 2 + 1,
        }
    };
    let mut left = Vec::new();
    let mut right = Vec::new();
    for v in 0..g.n() {
        match colors[v] {
            Color::Red if qualifies(v) => left.push(v),
            Color::Blue if qualifies(v) => right.push(v),
            _ => {}
        }
    }
    (left, right)
}

/// Candidates and the pairs that may not both be flipped. When minimizing
/// the conflicts are host edges between the two classes (a bipartite graph);
/// when maximizing they are host edges inside a class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictGraph {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub direction: Direction,
    /// Edges over local indices: `i < left.len()` is `left[i]`, otherwise
    /// `right[i - left.len()]`.
    pub edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl ConflictGraph {
    pub fn len(&self) -> usize {
        self.left.len() + self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn host(&self, i: usize) -> usize {
        if i < self.left.len() {
            self.left[i]
        } else {
            self.right[i - self.left.len()]
        }
    }

    pub fn is_left(&self, i: usize) -> bool {
        i < self.left.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Fraction of candidates without conflicts.
    pub fn isolated_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.adj.iter().filter(|a| a.is_empty()).count() as f64 / self.len() as f64
    }

    /// Direct construction from local-index edges (used for synthetic
    /// instances).
    pub fn from_parts(left: Vec<usize>, right: Vec<usize>, direction: Direction, edges: Vec<(usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); left.len() + right.len()];
        for &(a, b) in &edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        ConflictGraph {
            left,
            right,
            direction,
            edges,
            adj,
        }
    }
}

pub fn build_conflict_graph(g: &Graph, left: &[usize], right: &[usize], direction: Direction) -> ConflictGraph {
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in left.iter().chain(right).enumerate() {
        local[v] = i;
    }
    let nl = left.len();
    let edges: Vec<(usize, usize)> = (0..nl + right.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let v = if i < nl { left[i] } else { right[i - nl] };
            let local = &local;
            g.neighbors(v).iter().filter_map(move |&w| {
                let j = local[w as usize];
                if j == usize::MAX || j <= i {
                    return None;
                }
                let cross = (i < nl) != (j < nl);
                let conflict = match direction {
                    Direction::Minimize => cross,
                    Direction::Maximize => !cross,
                };
                conflict.then_some((i, j))
            })
        })
        .collect();
    ConflictGraph::from_parts(left.to_vec(), right.to_vec(), direction, edges)
}

/// Host vertices to flip: `red` turn Blue and `blue` turn Red.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapSet {
    pub red: Vec<usize>,
    pub blue: Vec<usize>,
}

impl SwapSet {
    pub fn len(&self) -> usize {
        self.red.len() + self.blue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn to_swap_set(cg: &ConflictGraph, chosen: &[usize]) -> SwapSet {
    let mut s = SwapSet::default();
    for &i in chosen {
        if cg.is_left(i) {
            s.red.push(cg.host(i));
        } else {
            s.blue.push(cg.host(i));
        }
    }
    s.red.sort_unstable();
    s.blue.sort_unstable();
    s
}

/// Whether the chosen local indices are independent in `cg`.
pub fn is_independent(cg: &ConflictGraph, chosen: &[usize]) -> bool {
    let set: HashSet<usize> = chosen.iter().copied().collect();
    chosen.iter().all(|&i| cg.neighbors(i).iter().all(|j| !set.contains(j)))
}

pub fn find_balanced_independent_set(cg: &ConflictGraph, strategy: Strategy, seed: u64) -> Result<SwapSet, RecolorError> {
    match strategy {
        Strategy::Greedy => Ok(greedy(cg, seed)),
        Strategy::Exact => exact(cg),
    }
}

/// Min-degree greedy independent set: the sides take turns, each taking its
/// unblocked vertex with the fewest unblocked neighbors (seeded random
/// tie-break), then the larger side is trimmed to balance. Best of
/// [`GREEDY_RESTARTS`] tie-break orders.
fn greedy(cg: &ConflictGraph, seed: u64) -> SwapSet {
    let nl = cg.left.len();
    let n = cg.len();
    let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
    for restart in 0..GREEDY_RESTARTS {
        let mut rng = rng::stream(seed, Purpose::IndependentSet, restart as u64);
        let tie: Vec<u32> = (0..n).map(|_| rng.gen()).collect();
        let mut deg: Vec<usize> = (0..n).map(|i| cg.neighbors(i).len()).collect();
        let mut blocked = vec![false; n];
        // min-heaps of (degree, tie, vertex) per side, with stale entries
        let mut heaps = [BinaryHeap::new(), BinaryHeap::new()];
        for i in 0..n {
            heaps[usize::from(i >= nl)].push(Reverse((deg[i], tie[i], i)));
        }
        let mut takes: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        let mut open = [true, true];
        while open[0] || open[1] {
            let side = if open[0] && (!open[1] || takes[0].len() <= takes[1].len()) { 0 } else { 1 };
            let pick = loop {
                match heaps[side].pop() {
                    None => break None,
                    Some(Reverse((dg, _, i))) if !blocked[i] && dg == deg[i] => break Some(i),
                    Some(_) => {}
                }
            };
            let Some(i) = pick else {
                open[side] = false;
                continue;
            };
            takes[side].push(i);
            blocked[i] = true;
            for &j in cg.neighbors(i) {
                if blocked[j] {
                    continue;
                }
                blocked[j] = true;
                for &w in cg.neighbors(j) {
                    if !blocked[w] {
                        deg[w] -= 1;
                        heaps[usize::from(w >= nl)].push(Reverse((deg[w], tie[w], w)));
                    }
                }
            }
        }
        let [mut take_l, mut take_r] = takes;
        let k = take_l.len().min(take_r.len());
        take_l.truncate(k);
        take_r.truncate(k);
        if best.as_ref().is_none_or(|b| b.0.len() < k) {
            best = Some((take_l, take_r));
        }
    }
    let (l, r) = best.unwrap_or_default();
    let chosen: Vec<usize> = l.into_iter().chain(r).collect();
    to_swap_set(cg, &chosen)
}

/// Maximum independent set inside `cand` (bitmask over local indices).
fn max_independent(adj: &[u64], cand: u64) -> u64 {
    if cand == 0 {
        return 0;
    }
    let v = cand.trailing_zeros() as usize;
    let bit = 1u64 << v;
    let nb = adj[v] & cand;
    if nb == 0 {
        return bit | max_independent(adj, cand & !bit);
    }
    let with = bit | max_independent(adj, cand & !bit & !nb);
    let without = max_independent(adj, cand & !bit);
    if with.count_ones() >= without.count_ones() {
        with
    } else {
        without
    }
}

/// Largest balanced independent set by enumerating independent subsets of
/// the smaller side and solving the rest exactly.
fn exact(cg: &ConflictGraph) -> Result<SwapSet, RecolorError> {
    let n = cg.len();
    if n > EXACT_LIMIT {
        return Err(RecolorError::ExactTooLarge(n));
    }
    let nl = cg.left.len();
    let mut adj = vec![0u64; n];
    for &(a, b) in &cg.edges {
        adj[a] |= 1 << b;
        adj[b] |= 1 << a;
    }
    let left_mask: u64 = (0..nl).fold(0, |m, i| m | 1 << i);
    let right_mask: u64 = (nl..n).fold(0, |m, i| m | 1 << i);
    let (small, large) = if nl <= n - nl { (left_mask, right_mask) } else { (right_mask, left_mask) };
    let small_idx: Vec<usize> = (0..n).filter(|&i| small >> i & 1 == 1).collect();
    let mut best = (0usize, 0u64, 0u64);
    let large_free = max_independent(&adj, large).count_ones() as usize;
    for sub in 0u64..(1u64 << small_idx.len()) {
        let mut s = 0u64;
        for (k, &i) in small_idx.iter().enumerate() {
            if sub >> k & 1 == 1 {
                s |= 1 << i;
            }
        }
        let size = s.count_ones() as usize;
        if size <= best.0 || best.0 >= large_free {
            continue;
        }
        if small_idx.iter().any(|&i| s >> i & 1 == 1 && adj[i] & s != 0) {
            continue;
        }
        let blocked = small_idx
            .iter()
            .filter(|&&i| s >> i & 1 == 1)
            .fold(0u64, |m, &i| m | adj[i]);
        let avail = large & !blocked;
        if (avail.count_ones() as usize).min(size) <= best.0 {
            continue;
        }
        let other = max_independent(&adj, avail);
        let k = size.min(other.count_ones() as usize);
        if k > best.0 {
            best = (k, s, other);
        }
    }
    let (k, s, o) = best;
    let pick = |mask: u64| -> Vec<usize> { (0..n).filter(|&i| mask >> i & 1 == 1).take(k).collect() };
    let chosen: Vec<usize> = pick(s).into_iter().chain(pick(o)).collect();
    Ok(to_swap_set(cg, &chosen))
}

fn check_swaps(g: &Graph, coloring: &ColoringAssignment, swaps: &SwapSet, direction: Direction) -> Result<(), RecolorError> {
    if swaps.red.len() != swaps.blue.len() {
        return Err(RecolorError::Unbalanced {
            red: swaps.red.len(),
            blue: swaps.blue.len(),
        });
    }
    let mut seen = HashSet::new();
    for (set, color) in [(&swaps.red, Color::Red), (&swaps.blue, Color::Blue)] {
        for &v in set.iter() {
            if !seen.insert(v) {
                return Err(RecolorError::Duplicate(v));
            }
            if coloring.color(v) != color {
                return Err(RecolorError::WrongColor { v, expected: color });
            }
        }
    }
    let colors = coloring.colors();
    for &v in swaps.red.iter().chain(&swaps.blue) {
        let (own, other) = own_other(g, &colors, v);
        let improving = match direction {
            Direction::Minimize => other > own,
            Direction::Maximize => own > other,
        };
        if !improving {
            return Err(RecolorError::NotImproving(v));
        }
        for &w in g.neighbors(v) {
            let w = w as usize;
            if w > v && seen.contains(&w) {
                let cross = colors[v] != colors[w];
                let conflict = match direction {
                    Direction::Minimize => cross,
                    Direction::Maximize => !cross,
                };
                if conflict {
                    return Err(RecolorError::NotIndependent(v, w));
                }
            }
        }
    }
    Ok(())
}

/// Flip the swap set one vertex at a time (red side first), recording each
/// flip's change in cut size. The set is validated before any mutation.
pub fn apply_swaps(
    g: &Graph,
    coloring: &ColoringAssignment,
    swaps: &SwapSet,
    direction: Direction,
) -> Result<(ColoringAssignment, Vec<i64>), RecolorError> {
    if let Some(v) = (0..g.n()).find(|&v| !coloring.color(v).is_colored()) {
        return Err(ColoringError::Uncolored(v).into());
    }
    check_swaps(g, coloring, swaps, direction)?;
    let mut out = coloring.clone();
    let mut colors = coloring.colors();
    let mut deltas = Vec::with_capacity(swaps.len());
    for &v in swaps.red.iter().chain(&swaps.blue) {
        let (own, other) = own_other(g, &colors, v);
        // edges to the old class become cut, edges to the new class stop being cut
        deltas.push(own as i64 - other as i64);
        let c = colors[v].opposite();
        colors[v] = c;
        out.set_color(v, c);
    }
    Ok((out, deltas))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecolorReport {
    pub criterion: Criterion,
    pub direction: Direction,
    pub strategy: Strategy,
    pub left: usize,
    pub right: usize,
    pub conflict_max_degree: usize,
    pub isolated_fraction: f64,
    /// Total number of flipped vertices.
    pub swapped: usize,
    pub cut_before: usize,
    pub cut_after: usize,
    pub deltas_histogram: BTreeMap<i64, usize>,
}

/// Candidates, conflict graph, balanced independent set and swaps in one go.
pub fn recolor(
    g: &Graph,
    coloring: &ColoringAssignment,
    criterion: Criterion,
    strategy: Strategy,
    direction: Direction,
    seed: u64,
) -> Result<(ColoringAssignment, RecolorReport, Vec<i64>), RecolorError> {
    let cut_before = cut_size(g, coloring)?;
    let (left, right) = miscolored_sets(g, coloring, criterion, direction);
    let cg = build_conflict_graph(g, &left, &right, direction);
    let swaps = find_balanced_independent_set(&cg, strategy, seed)?;
    let (out, deltas) = apply_swaps(g, coloring, &swaps, direction)?;
    let cut_after = cut_size(g, &out)?;
    let mut hist = BTreeMap::new();
    for &x in &deltas {
        *hist.entry(x).or_default() += 1;
    }
    let report = RecolorReport {
        criterion,
        direction,
        strategy,
        left: left.len(),
        right: right.len(),
        conflict_max_degree: cg.max_degree(),
        isolated_fraction: cg.isolated_fraction(),
        swapped: swaps.len(),
        cut_before,
        cut_after,
        deltas_histogram: hist,
    };
    Ok((out, report, deltas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures;

    fn two_edges() -> (Graph, ColoringAssignment) {
        let g = fixtures::matching(2);
        // u1=0, w1=1, u2=2, w2=3
        let a = ColoringAssignment::from_colors(&[Color::Red, Color::Blue, Color::Red, Color::Blue]);
        (g, a)
    }

    #[test]
    fn k4_single_red() {
        let g = fixtures::complete(4);
        let a = ColoringAssignment::from_colors(&[Color::Red, Color::Blue, Color::Blue, Color::Blue]);
        let (l, r) = miscolored_sets(&g, &a, Criterion::Terminal, Direction::Minimize);
        assert_eq!((l, r), (vec![0], vec![]));
        let mono = ColoringAssignment::from_colors(&[Color::Red; 4]);
        let (l, r) = miscolored_sets(&g, &mono, Criterion::Terminal, Direction::Minimize);
        assert!(l.is_empty() && r.is_empty());
    }

    #[test]
    fn two_edges_example() {
        let (g, a) = two_edges();
        let (l, r) = miscolored_sets(&g, &a, Criterion::Terminal, Direction::Minimize);
        assert_eq!((l.clone(), r.clone()), (vec![0, 2], vec![1, 3]));
        let cg = build_conflict_graph(&g, &l, &r, Direction::Minimize);
        let mut host: Vec<_> = cg.edges.iter().map(|&(i, j)| (cg.host(i), cg.host(j))).collect();
        host.sort();
        assert_eq!(host, vec![(0, 1), (2, 3)]);
        let ex = find_balanced_independent_set(&cg, Strategy::Exact, 0).unwrap();
        assert_eq!((ex.red.len(), ex.blue.len()), (1, 1));
        let gr = find_balanced_independent_set(&cg, Strategy::Greedy, 0).unwrap();
        assert_eq!(gr.len(), 2);
        let swaps = SwapSet { red: vec![0], blue: vec![3] };
        let (b, deltas) = apply_swaps(&g, &a, &swaps, Direction::Minimize).unwrap();
        assert_eq!(deltas, vec![-1, -1]);
        assert_eq!(cut_size(&g, &b).unwrap(), 0);
        assert_eq!(b.class_sizes(), a.class_sizes());
        let bad = SwapSet { red: vec![0], blue: vec![1] };
        assert!(matches!(
            apply_swaps(&g, &a, &bad, Direction::Minimize),
            Err(RecolorError::NotIndependent(0, 1))
        ));
        let unbalanced = SwapSet { red: vec![0, 2], blue: vec![3] };
        assert!(matches!(
            apply_swaps(&g, &a, &unbalanced, Direction::Minimize),
            Err(RecolorError::Unbalanced { .. })
        ));
    }

    #[test]
    fn empty_and_complete_conflicts() {
        let cg = ConflictGraph::from_parts((0..3).collect(), (3..8).collect(), Direction::Minimize, vec![]);
        for s in [Strategy::Greedy, Strategy::Exact] {
            let sw = find_balanced_independent_set(&cg, s, 1).unwrap();
            assert_eq!((sw.red.len(), sw.blue.len()), (3, 3));
        }
        let edges: Vec<_> = (0..3).flat_map(|i| (3..6).map(move |j| (i, j))).collect();
        let full = ConflictGraph::from_parts((0..3).collect(), (3..6).collect(), Direction::Minimize, edges);
        for s in [Strategy::Greedy, Strategy::Exact] {
            assert!(find_balanced_independent_set(&full, s, 1).unwrap().is_empty());
        }
        let empty = SwapSet::default();
        let (g, a) = two_edges();
        let (b, deltas) = apply_swaps(&g, &a, &empty, Direction::Minimize).unwrap();
        assert_eq!((b, deltas.len()), (a, 0));
    }

    #[test]
    fn exact_rejects_large_inputs() {
        let cg = ConflictGraph::from_parts((0..16).collect(), (16..32).collect(), Direction::Minimize, vec![]);
        assert!(matches!(
            find_balanced_independent_set(&cg, Strategy::Exact, 0),
            Err(RecolorError::ExactTooLarge(32))
        ));
    }

    #[test]
    fn maximize_direction_swaps_majority_vertices() {
        // only the middle vertex of each color run has two own neighbors
        let g = fixtures::cycle(6);
        let a = ColoringAssignment::from_colors(&[Color::Red, Color::Red, Color::Red, Color::Blue, Color::Blue, Color::Blue]);
        let (l, r) = miscolored_sets(&g, &a, Criterion::Terminal, Direction::Maximize);
        assert_eq!((l.clone(), r.clone()), (vec![1], vec![4]));
        let cg = build_conflict_graph(&g, &l, &r, Direction::Maximize);
        assert!(cg.edges.is_empty());
        let sw = find_balanced_independent_set(&cg, Strategy::Exact, 0).unwrap();
        let (b, deltas) = apply_swaps(&g, &a, &sw, Direction::Maximize).unwrap();
        assert_eq!(deltas, vec![2, 2]);
        assert_eq!(cut_size(&g, &b).unwrap(), 6);
    }
}
