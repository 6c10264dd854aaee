//! Simple d-regular graphs: configuration-model sampling, fixtures, short
//! cycle census and treelikeness diagnostics.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{self, Purpose};

pub const MAX_CYCLE_LENGTH: usize = 12;
const MAX_REJECT_ATTEMPTS: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("n*d must be even (n={n}, d={d})")]
    OddStubCount { n: usize, d: usize },
    #[error("need n > d (n={n}, d={d})")]
    TooFewVertices { n: usize, d: usize },
    #[error("degree must be at least 1, got {0}")]
    DegreeTooSmall(usize),
    #[error("vertex {v} has degree {deg}, expected {d}")]
    NotRegular { v: usize, deg: usize, d: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("parallel edge {0}-{1}")]
    ParallelEdge(usize, usize),
    #[error("vertex {v} out of range for n={n}")]
    VertexOutOfRange { v: usize, n: usize },
    #[error("kmax must be in 3..={MAX_CYCLE_LENGTH}, got {0}")]
    KmaxOutOfRange(usize),
    #[error("no simple pairing after {0} attempts")]
    RejectionLimit(usize),
    #[error("graph file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Simple undirected d-regular graph with flat adjacency storage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    d: usize,
    adj: Vec<u32>,
}

impl Graph {
    /// Build from an edge list, checking regularity and simplicity.
    pub fn from_edges(n: usize, d: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut lists: Vec<Vec<u32>> = vec![Vec::with_capacity(d); n];
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { v: x, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if lists[u].contains(&(v as u32)) {
                return Err(GraphError::ParallelEdge(u.min(v), u.max(v)));
            }
            lists[u].push(v as u32);
            lists[v].push(u as u32);
        }
        for (v, l) in lists.iter().enumerate() {
            if l.len() != d {
                return Err(GraphError::NotRegular { v, deg: l.len(), d });
            }
        }
        let mut adj = Vec::with_capacity(n * d);
        for mut l in lists {
            l.sort_unstable();
            adj.extend(l);
        }
        Ok(Graph { n, d, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn edge_count(&self) -> usize {
        self.n * self.d / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v * self.d..(v + 1) * self.d]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Whether every vertex can be 2-colored along edges.
    pub fn is_bipartite(&self) -> bool {
        let mut side = vec![u8::MAX; self.n];
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if side[s] != u8::MAX {
                continue;
            }
            side[s] = 0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &w in self.neighbors(u) {
                    let w = w as usize;
                    if side[w] == u8::MAX {
                        side[w] = 1 - side[u];
                        queue.push_back(w);
                    } else if side[w] == side[u] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Plain-text form: `n d` then one `u v` line per edge with `u < v`.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.d);
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn from_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| GraphError::Parse("empty file".into()))?;
        let (n, d) = parse_pair(header)?;
        let mut edges = Vec::with_capacity(n * d / 2);
        for line in lines {
            edges.push(parse_pair(line)?);
        }
        Graph::from_edges(n, d, &edges)
    }

    pub fn read(path: &Path) -> Result<Self, GraphError> {
        Graph::from_edge_list(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), GraphError> {
        Ok(std::fs::write(path, self.to_edge_list())?)
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize), GraphError> {
    let mut it = line.split_whitespace().map(|t| t.parse::<usize>());
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
        _ => Err(GraphError::Parse(format!("bad line `{line}`"))),
    }
}

/// Small named graphs used as fixtures.
pub mod fixtures {
    use super::Graph;

    pub fn complete(k: usize) -> Graph {
        let edges: Vec<_> = (0..k).flat_map(|u| (u + 1..k).map(move |v| (u, v))).collect();
        Graph::from_edges(k, k - 1, &edges).expect("complete graph")
    }

    /// `K_{k,k}`; vertices `0..k` form one side.
    pub fn complete_bipartite(k: usize) -> Graph {
        let edges: Vec<_> = (0..k).flat_map(|u| (k..2 * k).map(move |v| (u, v))).collect();
        Graph::from_edges(2 * k, k, &edges).expect("complete bipartite graph")
    }

    pub fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, 2, &edges).expect("cycle")
    }

    pub fn petersen() -> Graph {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        Graph::from_edges(10, 3, &edges).expect("petersen graph")
    }

    /// Disjoint union of `k` copies of `K2` (1-regular).
    pub fn matching(k: usize) -> Graph {
        let edges: Vec<_> = (0..k).map(|i| (2 * i, 2 * i + 1)).collect();
        Graph::from_edges(2 * k, 1, &edges).expect("perfect matching")
    }
}

/// How the configuration model is made simple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    /// Resample the pairing until it has no loops or parallel edges.
    Reject,
    /// Pair once, then remove defects by random double-edge switchings.
    Erase,
}

impl std::str::FromStr for SampleMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reject" => Ok(SampleMode::Reject),
            "erase" => Ok(SampleMode::Erase),
            other => Err(format!("unknown sample mode `{other}` (expected reject|erase)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub mode: SampleMode,
    pub seed: u64,
    pub attempts: usize,
    pub switchings: usize,
}

/// Random simple d-regular graph on `n` vertices. Deterministic in
/// `(n, d, seed, mode)`.
pub fn sample_regular_graph(n: usize, d: usize, seed: u64, mode: SampleMode) -> Result<(Graph, SampleMeta), GraphError> {
    if d < 1 {
        return Err(GraphError::DegreeTooSmall(d));
    }
    if n * d % 2 == 1 {
        return Err(GraphError::OddStubCount { n, d });
    }
    if n <= d {
        return Err(GraphError::TooFewVertices { n, d });
    }
    let mut rng = rng::stream(seed, Purpose::GraphSample, ((n as u64) << 8) | d as u64);
    match mode {
        SampleMode::Reject => {
            let mut stubs: Vec<u32> = Vec::with_capacity(n * d);
            let mut adj: Vec<Vec<u32>> = vec![Vec::with_capacity(d); n];
            for attempt in 1..=MAX_REJECT_ATTEMPTS {
                if let Some(edges) = try_simple_pairing(n, d, &mut rng, &mut stubs, &mut adj) {
                    let g = Graph::from_edges(n, d, &edges)?;
                    let meta = SampleMeta {
                        mode,
                        seed,
                        attempts: attempt,
                        switchings: 0,
                    };
                    return Ok((g, meta));
                }
            }
            Err(GraphError::RejectionLimit(MAX_REJECT_ATTEMPTS))
        }
        SampleMode::Erase => {
            let mut stubs: Vec<u32> = (0..n * d).map(|i| (i / d) as u32).collect();
            stubs.shuffle(&mut rng);
            let mut edges: Vec<(usize, usize)> = stubs
                .chunks_exact(2)
                .map(|c| (c[0] as usize, c[1] as usize))
                .collect();
            let switchings = erase_defects(&mut edges, &mut rng);
            let g = Graph::from_edges(n, d, &edges)?;
            Ok((
                g,
                SampleMeta {
                    mode,
                    seed,
                    attempts: 1,
                    switchings,
                },
            ))
        }
    }
}

/// Uniform pairing built one pair at a time; gives up as soon as a loop or
/// parallel edge appears.
fn try_simple_pairing<R: Rng>(
    n: usize,
    d: usize,
    rng: &mut R,
    stubs: &mut Vec<u32>,
    adj: &mut [Vec<u32>],
) -> Option<Vec<(usize, usize)>> {
    stubs.clear();
    stubs.extend((0..n * d).map(|i| (i / d) as u32));
    for l in adj.iter_mut() {
        l.clear();
    }
    let len = stubs.len();
    let mut edges = Vec::with_capacity(len / 2);
    let mut i = 0;
    while i < len {
        let j = rng.gen_range(i + 1..len);
        stubs.swap(i + 1, j);
        let (u, v) = (stubs[i], stubs[i + 1]);
        if u == v || adj[u as usize].contains(&v) {
            return None;
        }
        adj[u as usize].push(v);
        adj[v as usize].push(u);
        edges.push((u as usize, v as usize));
        i += 2;
    }
    Some(edges)
}

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

/// Replace loops and repeated edges by switchings `{u v, x y} -> {u x, v y}`
/// with a uniformly random partner edge. Returns the number of switchings.
fn erase_defects<R: Rng>(edges: &mut [(usize, usize)], rng: &mut R) -> usize {
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for &(u, v) in edges.iter() {
        *count.entry(key(u, v)).or_default() += 1;
    }
    let is_bad = |count: &HashMap<(usize, usize), usize>, (u, v): (usize, usize)| u == v || count[&key(u, v)] > 1;
    let mut switchings = 0;
    loop {
        let bad: Vec<usize> = (0..edges.len()).filter(|&i| is_bad(&count, edges[i])).collect();
        if bad.is_empty() {
            return switchings;
        }
        for i in bad {
            if !is_bad(&count, edges[i]) {
                continue;
            }
            let (u, v) = edges[i];
            let j = rng.gen_range(0..edges.len());
            if j == i {
                continue;
            }
            let (mut x, mut y) = edges[j];
            if rng.gen_bool(0.5) {
                std::mem::swap(&mut x, &mut y);
            }
            let a = key(u, x);
            let b = key(v, y);
            if u == x || v == y || a == b || count.contains_key(&a) || count.contains_key(&b) {
                continue;
            }
            for e in [key(u, v), key(edges[j].0, edges[j].1)] {
                let c = count.get_mut(&e).expect("edge counted");
                *c -= 1;
                if *c == 0 {
                    count.remove(&e);
                }
            }
            edges[i] = (u, x);
            edges[j] = (v, y);
            *count.entry(a).or_default() += 1;
            *count.entry(b).or_default() += 1;
            switchings += 1;
        }
    }
}

/// Number of simple cycles of each length `3..=kmax`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCensus {
    pub kmax: usize,
    pub counts: BTreeMap<usize, u64>,
}

impl CycleCensus {
    pub fn get(&self, k: usize) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }
}

/// Exact short-cycle counts by depth-first search from each cycle's smallest
/// vertex; both traversal directions are found and halved.
pub fn count_cycles(g: &Graph, kmax: usize) -> Result<CycleCensus, GraphError> {
    if !(3..=MAX_CYCLE_LENGTH).contains(&kmax) {
        return Err(GraphError::KmaxOutOfRange(kmax));
    }
    let mut raw = vec![0u64; kmax + 1];
    let mut on_path = vec![false; g.n()];
    for s in 0..g.n() {
        on_path[s] = true;
        cycle_dfs(g, s, s, 1, kmax, &mut on_path, &mut raw);
        on_path[s] = false;
    }
    let counts = (3..=kmax).map(|k| (k, raw[k] / 2)).collect();
    Ok(CycleCensus { kmax, counts })
}

fn cycle_dfs(g: &Graph, start: usize, u: usize, len: usize, kmax: usize, on_path: &mut [bool], raw: &mut [u64]) {
    for &w in g.neighbors(u) {
        let w = w as usize;
        if w == start {
            if len >= 3 {
                raw[len] += 1;
            }
        } else if w > start && !on_path[w] && len < kmax {
            on_path[w] = true;
            cycle_dfs(g, start, w, len + 1, kmax, on_path, raw);
            on_path[w] = false;
        }
    }
}

/// Mean number of `k`-cycles in a random d-regular graph, `(d-1)^k / (2k)`.
pub fn poisson_mean(d: usize, k: usize) -> f64 {
    (d as f64 - 1.0).powi(k as i32) / (2.0 * k as f64)
}

/// Fraction of vertices whose closed radius-`r` ball induces a forest.
pub fn treelike_fraction(g: &Graph, r: usize) -> f64 {
    if g.n() == 0 {
        return 1.0;
    }
    let mut dist = vec![usize::MAX; g.n()];
    let mut ball = Vec::new();
    let mut queue = VecDeque::new();
    let mut good = 0usize;
    for v in 0..g.n() {
        ball.clear();
        dist[v] = 0;
        ball.push(v);
        queue.push_back(v);
        while let Some(u) = queue.pop_front() {
            if dist[u] == r {
                continue;
            }
            for &w in g.neighbors(u) {
                let w = w as usize;
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    ball.push(w);
                    queue.push_back(w);
                }
            }
        }
        // the ball is connected, so it is a tree iff it has |ball|-1 edges
        let mut twice_edges = 0usize;
        for &u in &ball {
            twice_edges += g.neighbors(u).iter().filter(|&&w| dist[w as usize] != usize::MAX).count();
        }
        if twice_edges / 2 + 1 == ball.len() {
            good += 1;
        }
        for &u in &ball {
            dist[u] = usize::MAX;
        }
    }
    good as f64 / g.n() as f64
}

/// `(1/n) * sum_k X_k * k * (d-1)^(r - ceil(k/2))`, clamped to `[0, 1]`.
pub fn error_upper_bound(census: &CycleCensus, r: usize, d: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let base = d as f64 - 1.0;
    let total: f64 = census
        .counts
        .iter()
        .map(|(&k, &x)| x as f64 * k as f64 * base.powi(r as i32 - (k as i32 + 1) / 2))
        .sum();
    (total / n as f64).clamp(0.0, 1.0)
}

/// Census report with the Poisson reference means.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CensusReport {
    pub n: usize,
    pub d: usize,
    pub counts: BTreeMap<usize, u64>,
    pub lambda: BTreeMap<usize, f64>,
}

impl CensusReport {
    pub fn new(g: &Graph, census: &CycleCensus) -> Self {
        CensusReport {
            n: g.n(),
            d: g.d(),
            counts: census.counts.clone(),
            lambda: census.counts.keys().map(|&k| (k, poisson_mean(g.d(), k))).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k4_is_the_only_cubic_graph_on_four_vertices() {
        let (g, _) = sample_regular_graph(4, 3, 1, SampleMode::Reject).unwrap();
        assert_eq!(g, fixtures::complete(4));
    }

    #[test]
    fn parity_and_size_guards() {
        assert!(matches!(
            sample_regular_graph(5, 3, 1, SampleMode::Reject),
            Err(GraphError::OddStubCount { .. })
        ));
        assert!(matches!(
            sample_regular_graph(2, 3, 1, SampleMode::Reject),
            Err(GraphError::TooFewVertices { .. })
        ));
    }

    #[test]
    fn samples_are_simple_regular_and_reproducible() {
        for mode in [SampleMode::Reject, SampleMode::Erase] {
            let (g, meta) = sample_regular_graph(2000, 5, 42, mode).unwrap();
            assert_eq!(g.n(), 2000);
            for v in 0..g.n() {
                let nb = g.neighbors(v);
                assert_eq!(nb.len(), 5);
                assert!(nb.windows(2).all(|w| w[0] < w[1]));
                assert!(!nb.contains(&(v as u32)));
            }
            let (h, meta2) = sample_regular_graph(2000, 5, 42, mode).unwrap();
            assert_eq!(g, h);
            assert_eq!(meta, meta2);
            let (k, _) = sample_regular_graph(2000, 5, 43, mode).unwrap();
            assert_ne!(g, k);
        }
    }

    #[test]
    fn erase_mode_handles_dense_degrees() {
        let (g, meta) = sample_regular_graph(40, 12, 3, SampleMode::Erase).unwrap();
        assert_eq!(g.d(), 12);
        assert!(meta.switchings > 0);
    }

    #[test]
    fn fixture_cycle_counts() {
        let c = count_cycles(&fixtures::complete(4), 4).unwrap();
        assert_eq!((c.get(3), c.get(4)), (4, 3));
        let c = count_cycles(&fixtures::petersen(), 5).unwrap();
        assert_eq!((c.get(3), c.get(4), c.get(5)), (0, 0, 12));
        let c = count_cycles(&fixtures::cycle(7), 12).unwrap();
        assert_eq!(c.counts.values().sum::<u64>(), 1);
        assert_eq!(c.get(7), 1);
        assert!(count_cycles(&fixtures::complete(4), 2).is_err());
        assert!(count_cycles(&fixtures::complete(4), 13).is_err());
    }

    #[test]
    fn poisson_mean_values() {
        assert!((poisson_mean(5, 3) - 32.0 / 3.0).abs() < 1e-12);
        assert!((poisson_mean(5, 4) - 32.0).abs() < 1e-12);
    }

    #[test]
    fn treelike_examples() {
        assert_eq!(treelike_fraction(&fixtures::complete(4), 1), 0.0);
        assert_eq!(treelike_fraction(&fixtures::petersen(), 1), 1.0);
        assert_eq!(treelike_fraction(&fixtures::petersen(), 2), 0.0);
        assert_eq!(treelike_fraction(&fixtures::cycle(10), 2), 1.0);
        assert_eq!(treelike_fraction(&fixtures::cycle(10), 5), 0.0);
    }

    #[test]
    fn error_bound_examples() {
        assert_eq!(error_upper_bound(&CycleCensus::default(), 3, 5, 1000), 0.0);
        let mut c = CycleCensus { kmax: 3, ..Default::default() };
        c.counts.insert(3, 1);
        assert!((error_upper_bound(&c, 3, 5, 1000) - 0.012).abs() < 1e-15);
        c.counts.insert(3, 10_000);
        assert_eq!(error_upper_bound(&c, 3, 5, 1000), 1.0);
    }

    #[test]
    fn edge_list_roundtrip() {
        let g = fixtures::petersen();
        let text = g.to_edge_list();
        assert!(text.starts_with("10 3\n"));
        assert_eq!(Graph::from_edge_list(&text).unwrap(), g);
        assert!(Graph::from_edge_list("4 3\n0 1\n").is_err());
        assert!(Graph::from_edge_list("3 2\n0 1\n1 2\n2 x\n").is_err());
        assert!(matches!(
            Graph::from_edge_list("2 1\n0 0\n"),
            Err(GraphError::SelfLoop(0))
        ));
    }

    #[test]
    fn bipartite_detection() {
        assert!(fixtures::cycle(10).is_bipartite());
        assert!(!fixtures::cycle(9).is_bipartite());
        assert!(fixtures::complete_bipartite(3).is_bipartite());
        assert!(!fixtures::petersen().is_bipartite());
    }
}
