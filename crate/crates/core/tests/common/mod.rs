#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use regbisect::graph::Graph;
use regbisect::tree::{Mode, TreeEngine};
use regbisect::types::StepParams;

/// Greedy schedule computed on the tree.
pub fn tree_schedule(d: usize, eps: f64) -> Vec<StepParams> {
    TreeEngine::new(d, Mode::Exact).unwrap().run(eps).unwrap().schedule
}

/// Side of each vertex in a 2-coloring found by BFS, or `None` if the graph
/// has an odd cycle.
pub fn bfs_sides(g: &Graph) -> Option<Vec<bool>> {
    let mut side = vec![None; g.n()];
    for s in 0..g.n() {
        if side[s].is_some() {
            continue;
        }
        side[s] = Some(false);
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            let su = side[u].unwrap();
            for &w in g.neighbors(u) {
                let w = w as usize;
                match side[w] {
                    None => {
                        side[w] = Some(!su);
                        q.push_back(w);
                    }
                    Some(sw) if sw == su => return None,
                    _ => {}
                }
            }
        }
    }
    Some(side.into_iter().map(Option::unwrap).collect())
}

/// Random d-regular bipartite graph on `2k` vertices: side `i < k` joined to
/// `k + (pi(i) + j) mod k` for `j < d`, with vertex labels shuffled.
pub fn bipartite_circulant(k: usize, d: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pi: Vec<usize> = (0..k).collect();
    pi.shuffle(&mut rng);
    let mut label: Vec<usize> = (0..2 * k).collect();
    label.shuffle(&mut rng);
    let mut edges = Vec::new();
    for i in 0..k {
        for j in 0..d {
            edges.push((label[i], label[k + (pi[i] + j) % k]));
        }
    }
    Graph::from_edges(2 * k, d, &edges).unwrap()
}

/// Vertices within distance `r` of `v`.
pub fn ball(g: &Graph, v: usize, r: usize) -> Vec<bool> {
    let mut dist = vec![usize::MAX; g.n()];
    dist[v] = 0;
    let mut q = VecDeque::from([v]);
    while let Some(u) = q.pop_front() {
        if dist[u] == r {
            continue;
        }
        for &w in g.neighbors(u) {
            let w = w as usize;
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                q.push_back(w);
            }
        }
    }
    dist.into_iter().map(|x| x != usize::MAX).collect()
}

/// Cycle counts by length, from every edge subset that forms one connected
/// 2-regular subgraph.
pub fn brute_force_counts(g: &Graph) -> Vec<u64> {
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let m = edges.len();
    assert!(m <= 24, "too many edges for the oracle");
    let mut counts = vec![0u64; g.n() + 1];
    for mask in 1u32..(1u32 << m) {
        let k = mask.count_ones() as usize;
        if k < 3 || k > g.n() {
            continue;
        }
        let mut deg = vec![0u8; g.n()];
        let mut verts = BTreeSet::new();
        for (i, &(u, v)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                deg[u] += 1;
                deg[v] += 1;
                verts.insert(u);
                verts.insert(v);
            }
        }
        if verts.len() != k || verts.iter().any(|&v| deg[v] != 2) {
            continue;
        }
        // connected?
        let start = *verts.iter().next().unwrap();
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for (i, &(a, b)) in edges.iter().enumerate() {
                if mask >> i & 1 == 1 && (a == u || b == u) {
                    let w = if a == u { b } else { a };
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
        }
        if seen.len() == k {
            counts[k] += 1;
        }
    }
    counts
}

pub fn cube() -> Graph {
    let mut edges = Vec::new();
    for v in 0..8usize {
        for b in 0..3 {
            let w = v ^ (1 << b);
            if v < w {
                edges.push((v, w));
            }
        }
    }
    Graph::from_edges(8, 3, &edges).unwrap()
}

pub fn prism(k: usize) -> Graph {
    let mut edges = Vec::new();
    for i in 0..k {
        edges.push((i, (i + 1) % k));
        edges.push((k + i, k + (i + 1) % k));
        edges.push((i, k + i));
    }
    Graph::from_edges(2 * k, 3, &edges).unwrap()
}
