//! Enumeration and dense indexing of canonical tree states.
//!
//! Neighbor descriptors are mapped to symbols `0..A` (`ColoredRed`,
//! `ColoredBlue`, then `Open(r, b)` in lexicographic order). A neighbor
//! multiset of size `k` is a sorted symbol sequence, indexed by its colex
//! rank in the combinatorial number system.

use crate::tree::state::{NeighborDescriptor, RootStatus, TreeState};
use crate::tree::TreeError;

pub const MIN_DEGREE: usize = 3;
pub const MAX_DEGREE: usize = 7;

pub const RED: u8 = 0;
pub const BLUE: u8 = 1;

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Pascal table for fast ranking.
#[derive(Debug, Clone)]
struct Binomials {
    table: Vec<Vec<u64>>,
}

impl Binomials {
    fn new(max_n: usize) -> Self {
        let mut table = vec![vec![0u64; max_n + 1]; max_n + 1];
        for n in 0..=max_n {
            table[n][0] = 1;
            for k in 1..=n {
                table[n][k] = table[n - 1][k - 1] + if k < n { table[n - 1][k] } else { 0 };
            }
        }
        Binomials { table }
    }

    #[inline]
    fn get(&self, n: usize, k: usize) -> u64 {
        if k > n {
            0
        } else {
            self.table[n][k]
        }
    }
}

/// All sorted multisets of a fixed size over `alphabet` symbols.
#[derive(Debug, Clone)]
pub struct MultisetSpace {
    size: usize,
    alphabet: usize,
    items: Vec<u8>,
}

impl MultisetSpace {
    pub fn count(alphabet: usize, size: usize) -> usize {
        binomial(alphabet + size - 1, size) as usize
    }

    fn new(alphabet: usize, size: usize, binom: &Binomials) -> Self {
        let len = Self::count(alphabet, size);
        let mut items = vec![0u8; len * size];
        let mut current = vec![0u8; size];
        let mut space = MultisetSpace {
            size,
            alphabet,
            items: Vec::new(),
        };
        if size == 0 {
            space.items = items;
            return space;
        }
        loop {
            let r = rank_sorted(&current, binom);
            items[r * size..(r + 1) * size].copy_from_slice(&current);
            // next non-decreasing sequence
            let mut pos = size;
            while pos > 0 && current[pos - 1] as usize == alphabet - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            let v = current[pos - 1] + 1;
            for c in current[pos - 1..].iter_mut() {
                *c = v;
            }
        }
        space.items = items;
        space
    }

    pub fn len(&self) -> usize {
        if self.size == 0 {
            1
        } else {
            self.items.len() / self.size
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn item(&self, idx: usize) -> &[u8] {
        &self.items[idx * self.size..(idx + 1) * self.size]
    }
}

fn rank_sorted(symbols: &[u8], binom: &Binomials) -> usize {
    symbols
        .iter()
        .enumerate()
        .map(|(i, &a)| binom.get(a as usize + i, i + 1))
        .sum::<u64>() as usize
}

/// Canonical states for one degree.
#[derive(Debug, Clone)]
pub struct StateSpace {
    d: usize,
    alphabet: Vec<NeighborDescriptor>,
    open_index: Vec<Vec<u8>>,
    binom: Binomials,
    neighbors: MultisetSpace,
    red: Vec<u8>,
    blue: Vec<u8>,
    swap: Vec<u32>,
}

impl StateSpace {
    pub fn new(d: usize) -> Result<Self, TreeError> {
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&d) {
            return Err(TreeError::UnsupportedDegree(d));
        }
        let mut alphabet = vec![NeighborDescriptor::ColoredRed, NeighborDescriptor::ColoredBlue];
        let mut open_index = vec![vec![u8::MAX; d]; d];
        for r in 0..d {
            for b in 0..d - r {
                open_index[r][b] = alphabet.len() as u8;
                alphabet.push(NeighborDescriptor::open(r as u8, b as u8));
            }
        }
        let binom = Binomials::new(alphabet.len() + d + 1);
        let neighbors = MultisetSpace::new(alphabet.len(), d, &binom);
        let mut red = Vec::with_capacity(neighbors.len());
        let mut blue = Vec::with_capacity(neighbors.len());
        for idx in 0..neighbors.len() {
            let item = neighbors.item(idx);
            red.push(item.iter().filter(|&&s| s == RED).count() as u8);
            blue.push(item.iter().filter(|&&s| s == BLUE).count() as u8);
        }
        let mut space = StateSpace {
            d,
            alphabet,
            open_index,
            binom,
            neighbors,
            red,
            blue,
            swap: Vec::new(),
        };
        let swap_sym: Vec<u8> = space
            .alphabet
            .iter()
            .map(|desc| space.symbol(desc.swapped()))
            .collect();
        let mut buf = vec![0u8; d];
        space.swap = (0..space.neighbors.len())
            .map(|idx| {
                for (o, &s) in buf.iter_mut().zip(space.neighbors.item(idx)) {
                    *o = swap_sym[s as usize];
                }
                space.rank(&mut buf) as u32
            })
            .collect();
        Ok(space)
    }

    /// Number of canonical states (root statuses times neighbor multisets),
    /// without building the space.
    pub fn count(d: usize) -> Result<usize, TreeError> {
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&d) {
            return Err(TreeError::UnsupportedDegree(d));
        }
        let alphabet = 2 + d * (d + 1) / 2;
        Ok(RootStatus::ALL.len() * MultisetSpace::count(alphabet, d))
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    /// Descriptor alphabet in symbol order.
    pub fn alphabet(&self) -> &[NeighborDescriptor] {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    /// Number of neighbor multisets.
    pub fn multisets(&self) -> usize {
        self.neighbors.len()
    }

    /// Total number of states.
    pub fn len(&self) -> usize {
        RootStatus::ALL.len() * self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neighbor_space(&self) -> &MultisetSpace {
        &self.neighbors
    }

    pub fn symbol(&self, desc: NeighborDescriptor) -> u8 {
        match desc {
            NeighborDescriptor::ColoredRed => RED,
            NeighborDescriptor::ColoredBlue => BLUE,
            NeighborDescriptor::Open {
                outer_red,
                outer_blue,
            } => self.open_symbol(outer_red as usize, outer_blue as usize),
        }
    }

    #[inline]
    pub fn open_symbol(&self, outer_red: usize, outer_blue: usize) -> u8 {
        self.open_index[outer_red][outer_blue]
    }

    /// Rank of a symbol multiset; sorts `symbols` in place.
    pub fn rank(&self, symbols: &mut [u8]) -> usize {
        symbols.sort_unstable();
        rank_sorted(symbols, &self.binom)
    }

    pub(crate) fn rank_sorted(&self, symbols: &[u8]) -> usize {
        rank_sorted(symbols, &self.binom)
    }

    /// Multiset index of a state's neighbors.
    pub fn neighbor_index(&self, state: &TreeState) -> Result<usize, TreeError> {
        if !state.is_valid_for(self.d) {
            return Err(TreeError::InvalidState(state.to_string()));
        }
        let mut syms: Vec<u8> = state.neighbors().iter().map(|&n| self.symbol(n)).collect();
        Ok(self.rank(&mut syms))
    }

    /// Materialize the state at (`root`, neighbor multiset `idx`).
    pub fn state(&self, root: RootStatus, idx: usize) -> TreeState {
        TreeState::new(
            root,
            self.neighbors
                .item(idx)
                .iter()
                .map(|&s| self.alphabet[s as usize])
                .collect(),
        )
    }

    #[inline]
    pub fn red_count(&self, idx: usize) -> usize {
        self.red[idx] as usize
    }

    #[inline]
    pub fn blue_count(&self, idx: usize) -> usize {
        self.blue[idx] as usize
    }

    #[inline]
    pub fn open_count(&self, idx: usize) -> usize {
        self.d - self.red[idx] as usize - self.blue[idx] as usize
    }

    /// Index of the color-swapped neighbor multiset.
    #[inline]
    pub fn swapped_index(&self, idx: usize) -> usize {
        self.swap[idx] as usize
    }

    /// Every canonical state, root status major.
    pub fn iter_states(&self) -> impl Iterator<Item = TreeState> + '_ {
        RootStatus::ALL
            .iter()
            .flat_map(move |&root| (0..self.multisets()).map(move |idx| self.state(root, idx)))
    }

    pub(crate) fn build_multiset_space(&self, size: usize) -> MultisetSpace {
        MultisetSpace::new(self.alphabet.len(), size, &self.binom)
    }
}

/// All canonical states for degree `d`.
pub fn enumerate_states(d: usize) -> Result<StateSpace, TreeError> {
    StateSpace::new(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn alphabet_sizes() {
        let s5 = StateSpace::new(5).unwrap();
        assert_eq!(s5.alphabet_size(), 17);
        let s3 = StateSpace::new(3).unwrap();
        assert_eq!(s3.alphabet_size(), 8);
        assert_eq!(s3.multisets(), 120);
        assert_eq!(s3.len(), 600);
    }

    #[test]
    fn d5_state_count() {
        let s = StateSpace::new(5).unwrap();
        assert_eq!(s.multisets(), 20349);
        assert_eq!(s.len(), 101_745);
        assert_eq!(StateSpace::count(5).unwrap(), 101_745);
    }

    #[test]
    fn unsupported_degree() {
        assert!(matches!(StateSpace::new(2), Err(TreeError::UnsupportedDegree(2))));
        assert!(StateSpace::new(8).is_err());
        assert!(StateSpace::count(2).is_err());
    }

    #[test]
    fn ranking_is_a_bijection() {
        for d in 3..=5 {
            let s = StateSpace::new(d).unwrap();
            let mut seen = HashSet::new();
            for idx in 0..s.multisets() {
                let item = s.neighbor_space().item(idx).to_vec();
                assert!(item.windows(2).all(|w| w[0] <= w[1]));
                let mut copy = item.clone();
                assert_eq!(s.rank(&mut copy), idx);
                assert!(seen.insert(item));
            }
        }
    }

    #[test]
    fn states_roundtrip_through_index() {
        let s = StateSpace::new(4).unwrap();
        let all: Vec<_> = s.iter_states().collect();
        assert_eq!(all.len(), s.len());
        let unique: HashSet<_> = all.iter().cloned().collect();
        assert_eq!(unique.len(), all.len());
        for st in all.iter().step_by(37) {
            let idx = s.neighbor_index(st).unwrap();
            assert_eq!(&s.state(st.root, idx), st);
        }
    }

    #[test]
    fn swap_index_matches_state_swap() {
        let s = StateSpace::new(4).unwrap();
        for idx in 0..s.multisets() {
            let st = s.state(RootStatus::Uncolored, idx);
            let sw = s.state(RootStatus::Uncolored, s.swapped_index(idx));
            assert_eq!(st.swapped(), sw);
            assert_eq!(s.red_count(idx), s.blue_count(s.swapped_index(idx)));
        }
    }
}
