//! Independent per-neighbor kernels applied to exchangeable neighbor
//! multisets.
//!
//! Applying the same kernel `K` independently to all `d` neighbors is done in
//! `d` passes. After `j` passes a state is a pair (processed multiset of size
//! `j`, unprocessed multiset of size `d - j`); by exchangeability the next
//! element to process is a uniform pick from the unprocessed part.

use crate::tree::space::{MultisetSpace, StateSpace};

/// Sparse row-stochastic kernel on neighbor symbols.
#[derive(Clone, Debug, Default)]
pub struct NeighborKernel {
    rows: Vec<Vec<(u8, f64)>>,
}

impl NeighborKernel {
    pub fn new(rows: Vec<Vec<(u8, f64)>>) -> Self {
        NeighborKernel { rows }
    }

    pub fn row(&self, sym: usize) -> &[(u8, f64)] {
        &self.rows[sym]
    }

    pub fn is_identity_row(&self, sym: usize) -> bool {
        let r = &self.rows[sym];
        r.len() == 1 && r[0].0 as usize == sym && r[0].1 == 1.0
    }
}

#[derive(Clone, Copy, Debug)]
struct Removal {
    sym: u8,
    count: u8,
    rest: u32,
}

#[derive(Debug)]
struct RemovalTable {
    offsets: Vec<u32>,
    entries: Vec<Removal>,
}

impl RemovalTable {
    #[inline]
    fn of(&self, idx: usize) -> &[Removal] {
        &self.entries[self.offsets[idx] as usize..self.offsets[idx + 1] as usize]
    }
}

/// Precomputed add/remove index maps between multiset spaces of sizes
/// `0..=d`.
#[derive(Debug)]
pub struct PassTables {
    d: usize,
    alphabet: usize,
    sizes: Vec<usize>,
    // add[k][idx * A + sym] = rank of (item + sym) in S_{k+1}
    add: Vec<Vec<u32>>,
    // remove[k] describes S_k -> S_{k-1}; remove[0] is empty
    remove: Vec<RemovalTable>,
}

/// Largest degree the dense kernels are built for.
pub const MAX_KERNEL_DEGREE: usize = 6;

impl PassTables {
    pub fn new(space: &StateSpace) -> Self {
        let d = space.degree();
        let a = space.alphabet_size();
        let spaces: Vec<MultisetSpace> = (0..=d).map(|k| space.build_multiset_space(k)).collect();
        let sizes = spaces.iter().map(|s| s.len()).collect();
        let mut add = Vec::with_capacity(d);
        let mut buf = Vec::with_capacity(d + 1);
        for k in 0..d {
            let sp = &spaces[k];
            let mut table = vec![0u32; sp.len() * a];
            for idx in 0..sp.len() {
                for sym in 0..a {
                    buf.clear();
                    buf.extend_from_slice(sp.item(idx));
                    buf.push(sym as u8);
                    buf.sort_unstable();
                    table[idx * a + sym] = space.rank_sorted(&buf) as u32;
                }
            }
            add.push(table);
        }
        let mut remove = Vec::with_capacity(d + 1);
        remove.push(RemovalTable {
            offsets: vec![0, 0],
            entries: Vec::new(),
        });
        for sp in spaces.iter().skip(1) {
            let mut offsets = Vec::with_capacity(sp.len() + 1);
            let mut entries = Vec::new();
            offsets.push(0u32);
            for idx in 0..sp.len() {
                let item = sp.item(idx);
                let mut pos = 0;
                while pos < item.len() {
                    let sym = item[pos];
                    let mut end = pos;
                    while end < item.len() && item[end] == sym {
                        end += 1;
                    }
                    buf.clear();
                    buf.extend_from_slice(&item[..pos]);
                    buf.extend_from_slice(&item[pos + 1..]);
                    entries.push(Removal {
                        sym,
                        count: (end - pos) as u8,
                        rest: space.rank_sorted(&buf) as u32,
                    });
                    pos = end;
                }
                offsets.push(entries.len() as u32);
            }
            remove.push(RemovalTable { offsets, entries });
        }
        PassTables {
            d,
            alphabet: a,
            sizes,
            add,
            remove,
        }
    }

    /// Apply `kernel` independently to every neighbor of every multiset in
    /// `input`, adding the image into `out`. `scratch` is reused between
    /// calls.
    pub fn apply(&self, input: &[f64], kernel: &NeighborKernel, out: &mut [f64], scratch: &mut Scratch) {
        let d = self.d;
        let a = self.alphabet;
        debug_assert_eq!(input.len(), self.sizes[d]);
        debug_assert_eq!(out.len(), self.sizes[d]);
        if input.iter().all(|&w| w == 0.0) {
            return;
        }
        scratch.a.clear();
        scratch.a.extend_from_slice(input);
        for j in 0..d {
            let unproc = d - j;
            let src_u = self.sizes[unproc];
            let dst_u = self.sizes[unproc - 1];
            let dst_len = self.sizes[j + 1] * dst_u;
            scratch.b.clear();
            scratch.b.resize(dst_len, 0.0);
            let inv = 1.0 / unproc as f64;
            let add = &self.add[j];
            let removal = &self.remove[unproc];
            for (src_idx, &m) in scratch.a.iter().enumerate() {
                if m == 0.0 {
                    continue;
                }
                let p = src_idx / src_u;
                let u = src_idx % src_u;
                let add_row = &add[p * a..(p + 1) * a];
                for rem in removal.of(u) {
                    let w = m * rem.count as f64 * inv;
                    let rest = rem.rest as usize;
                    for &(o, kp) in kernel.row(rem.sym as usize) {
                        let target = add_row[o as usize] as usize * dst_u + rest;
                        scratch.b[target] += w * kp;
                    }
                }
            }
            std::mem::swap(&mut scratch.a, &mut scratch.b);
        }
        for (o, &w) in out.iter_mut().zip(scratch.a.iter()) {
            *o += w;
        }
    }

    /// Index of the multiset obtained from `idx` (size `d`) by replacing one
    /// copy of `from` with `to`. `from` must occur in the multiset.
    #[inline]
    pub fn replace(&self, idx: usize, from: u8, to: u8) -> usize {
        let rest = self.remove[self.d]
            .of(idx)
            .iter()
            .find(|r| r.sym == from)
            .expect("symbol present in multiset")
            .rest as usize;
        self.add[self.d - 1][rest * self.alphabet + to as usize] as usize
    }

    /// Distinct symbols of multiset `idx` (size `d`) with multiplicities.
    pub fn distinct(&self, idx: usize) -> impl Iterator<Item = (u8, usize)> + '_ {
        self.remove[self.d]
            .of(idx)
            .iter()
            .map(|r| (r.sym, r.count as usize))
    }
}

/// Reusable buffers for [`PassTables::apply`].
#[derive(Default, Debug)]
pub struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::state::{NeighborDescriptor, RootStatus};
    use std::collections::HashMap;

    /// Ordered-tuple brute force: expand each multiset into all orderings
    /// with equal weight, apply the kernel coordinatewise, re-canonicalize.
    fn brute_force(space: &StateSpace, input: &[f64], kernel: &NeighborKernel) -> Vec<f64> {
        let d = space.degree();
        let a = space.alphabet_size();
        let mut out = vec![0.0; input.len()];
        let total_tuples = a.pow(d as u32);
        let mut tuple = vec![0u8; d];
        // count orderings of each multiset
        let mut orderings: HashMap<usize, usize> = HashMap::new();
        for code in 0..total_tuples {
            let mut c = code;
            for t in tuple.iter_mut() {
                *t = (c % a) as u8;
                c /= a;
            }
            let mut s = tuple.clone();
            *orderings.entry(space.rank(&mut s)).or_default() += 1;
        }
        for code in 0..total_tuples {
            let mut c = code;
            for t in tuple.iter_mut() {
                *t = (c % a) as u8;
                c /= a;
            }
            let mut s = tuple.clone();
            let idx = space.rank(&mut s);
            let w = input[idx] / orderings[&idx] as f64;
            if w == 0.0 {
                continue;
            }
            // product over coordinates
            let mut partial: Vec<(Vec<u8>, f64)> = vec![(Vec::new(), w)];
            for &sym in &tuple {
                let mut next = Vec::new();
                for (prefix, pw) in &partial {
                    for &(o, kp) in kernel.row(sym as usize) {
                        let mut p = prefix.clone();
                        p.push(o);
                        next.push((p, pw * kp));
                    }
                }
                partial = next;
            }
            for (mut p, pw) in partial {
                out[space.rank(&mut p)] += pw;
            }
        }
        out
    }

    fn test_kernel(space: &StateSpace) -> NeighborKernel {
        let a = space.alphabet_size();
        let d = space.degree();
        let mut rows = Vec::new();
        for sym in 0..a {
            match space.alphabet()[sym] {
                NeighborDescriptor::Open { outer_red, outer_blue } => {
                    let mut row = vec![(0u8, 0.1), (1u8, 0.15)];
                    let stay = 0.75;
                    if (outer_red + outer_blue) as usize + 1 < d {
                        row.push((space.open_symbol(outer_red as usize + 1, outer_blue as usize), 0.2));
                        row.push((sym as u8, stay - 0.2));
                    } else {
                        row.push((sym as u8, stay));
                    }
                    rows.push(row);
                }
                _ => rows.push(vec![(sym as u8, 1.0)]),
            }
        }
        NeighborKernel::new(rows)
    }

    #[test]
    fn passes_match_ordered_brute_force() {
        let space = StateSpace::new(3).unwrap();
        let tables = PassTables::new(&space);
        let kernel = test_kernel(&space);
        let n = space.multisets();
        let input: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 / 1000.0).collect();
        let mut out = vec![0.0; n];
        let mut scratch = Scratch::default();
        tables.apply(&input, &kernel, &mut out, &mut scratch);
        let expected = brute_force(&space, &input, &kernel);
        for i in 0..n {
            assert!((out[i] - expected[i]).abs() < 1e-14, "{}: {} vs {}", space.state(RootStatus::Uncolored, i), out[i], expected[i]);
        }
        let si: f64 = input.iter().sum();
        let so: f64 = out.iter().sum();
        assert!((si - so).abs() < 1e-13);
    }

    #[test]
    fn replace_swaps_one_copy() {
        let space = StateSpace::new(4).unwrap();
        let tables = PassTables::new(&space);
        let o00 = space.open_symbol(0, 0);
        let mut syms = vec![o00, o00, 0, 1];
        let idx = space.rank(&mut syms);
        let j = tables.replace(idx, o00, 1);
        let st = space.state(RootStatus::Uncolored, j);
        assert_eq!(st.colored_counts(), (1, 2));
        let distinct: Vec<_> = tables.distinct(idx).collect();
        assert_eq!(distinct.len(), 3);
        assert!(distinct.contains(&(o00, 2)));
    }
}
