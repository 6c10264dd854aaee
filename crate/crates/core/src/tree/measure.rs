//! Probability measures over canonical tree states.

use std::collections::HashMap;
use std::sync::Arc;

use crate::tree::space::StateSpace;
use crate::tree::state::{NeighborDescriptor, RootStatus, TreeState};
use crate::tree::TreeError;
use crate::types::{Color, VertexType};

/// Compensated (Neumaier) summation.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Law of the colored depth-2 neighborhood of the root.
///
/// Dense storage: one slab of `multisets()` masses per root status.
#[derive(Clone, Debug)]
pub struct Measure {
    space: Arc<StateSpace>,
    pub(crate) mass: Vec<f64>,
}

impl Measure {
    pub fn zero(space: Arc<StateSpace>) -> Self {
        let len = space.len();
        Measure {
            space,
            mass: vec![0.0; len],
        }
    }

    /// All vertices uncolored: unit mass on `(U; d x Open(0,0))`.
    pub fn initial(space: Arc<StateSpace>) -> Self {
        let d = space.degree();
        let state = TreeState::new(
            RootStatus::Uncolored,
            vec![NeighborDescriptor::open(0, 0); d],
        );
        let mut m = Measure::zero(space);
        m.set(&state, 1.0).expect("initial state is valid");
        m
    }

    pub fn from_states<I>(space: Arc<StateSpace>, states: I) -> Result<Self, TreeError>
    where
        I: IntoIterator<Item = (TreeState, f64)>,
    {
        let mut m = Measure::zero(space);
        for (s, w) in states {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(TreeError::NegativeMass(w));
            }
            let idx = m.index(&s)?;
            m.mass[idx] += w;
        }
        Ok(m)
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn degree(&self) -> usize {
        self.space.degree()
    }

    fn index(&self, state: &TreeState) -> Result<usize, TreeError> {
        let n = self.space.neighbor_index(state)?;
        Ok(state.root.index() * self.space.multisets() + n)
    }

    pub fn get(&self, state: &TreeState) -> f64 {
        self.index(state).map(|i| self.mass[i]).unwrap_or(0.0)
    }

    pub fn set(&mut self, state: &TreeState, mass: f64) -> Result<(), TreeError> {
        let i = self.index(state)?;
        self.mass[i] = mass;
        Ok(())
    }

    /// Slab of masses for one root status, indexed by neighbor multiset.
    pub fn slab(&self, root: RootStatus) -> &[f64] {
        let m = self.space.multisets();
        let s = root.index();
        &self.mass[s * m..(s + 1) * m]
    }

    /// Nonzero entries.
    pub fn iter(&self) -> impl Iterator<Item = (TreeState, f64)> + '_ {
        let m = self.space.multisets();
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(move |(i, &w)| (self.space.state(RootStatus::ALL[i / m], i % m), w))
    }

    pub fn support_size(&self) -> usize {
        self.mass.iter().filter(|&&w| w != 0.0).count()
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.mass.iter().copied())
    }

    /// Set masses below `threshold` (in absolute value) to zero.
    pub fn prune(&mut self, threshold: f64) {
        for w in self.mass.iter_mut() {
            if w.abs() < threshold {
                *w = 0.0;
            }
        }
    }

    fn weighted<F>(&self, root: RootStatus, f: F) -> f64
    where
        F: Fn(usize) -> f64,
    {
        compensated_sum(
            self.slab(root)
                .iter()
                .enumerate()
                .filter(|(_, &w)| w != 0.0)
                .map(|(i, &w)| w * f(i)),
        )
    }

    fn root_mass_where<F>(&self, pred: F) -> f64
    where
        F: Fn(RootStatus) -> bool,
    {
        compensated_sum(
            RootStatus::ALL
                .iter()
                .filter(|&&r| pred(r))
                .map(|&r| compensated_sum(self.slab(r).iter().copied())),
        )
    }

    pub fn uncolored_root_mass(&self) -> f64 {
        self.root_mass_where(|r| r == RootStatus::Uncolored)
    }

    pub fn colored_root_mass(&self) -> f64 {
        self.root_mass_where(|r| r != RootStatus::Uncolored)
    }

    /// P(root is `color`).
    pub fn root_color_mass(&self, color: Color) -> f64 {
        self.root_mass_where(|r| r.color() == color)
    }

    /// P(a fixed neighbor of the root is `color`).
    pub fn neighbor_color_mass(&self, color: Color) -> f64 {
        let d = self.degree() as f64;
        let sp = &self.space;
        compensated_sum(RootStatus::ALL.iter().map(|&r| {
            self.weighted(r, |i| {
                let c = match color {
                    Color::Red => sp.red_count(i),
                    Color::Blue => sp.blue_count(i),
                    Color::Uncolored => sp.open_count(i),
                };
                c as f64 / d
            })
        }))
    }

    /// Mass of uncolored roots per unordered type, in increasing priority.
    pub fn root_type_masses(&self) -> Vec<(VertexType, f64)> {
        let d = self.degree();
        let mut acc: HashMap<VertexType, Vec<f64>> = HashMap::new();
        for (i, &w) in self.slab(RootStatus::Uncolored).iter().enumerate() {
            if w != 0.0 {
                let t = VertexType::new(self.space.red_count(i) as u8, self.space.blue_count(i) as u8);
                acc.entry(t).or_default().push(w);
            }
        }
        let mut out: Vec<(VertexType, f64)> = VertexType::all(d)
            .into_iter()
            .map(|t| (t, acc.get(&t).map(|v| compensated_sum(v.iter().copied())).unwrap_or(0.0)))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Mass of uncolored roots whose colored neighbors form type `t`.
    pub fn root_type_mass(&self, t: VertexType) -> f64 {
        let sp = &self.space;
        self.weighted(RootStatus::Uncolored, |i| {
            if VertexType::new(sp.red_count(i) as u8, sp.blue_count(i) as u8) == t {
                1.0
            } else {
                0.0
            }
        })
    }

    /// P(root and one fixed neighbor both uncolored).
    pub fn uncolored_edge_mass(&self) -> f64 {
        let d = self.degree() as f64;
        let sp = &self.space;
        self.weighted(RootStatus::Uncolored, |i| sp.open_count(i) as f64 / d)
    }

    /// No uncolored root and no open neighbor carries mass.
    pub fn is_fully_colored(&self) -> bool {
        let sp = &self.space;
        self.slab(RootStatus::Uncolored).iter().all(|&w| w == 0.0)
            && RootStatus::ALL.iter().all(|&r| {
                self.slab(r)
                    .iter()
                    .enumerate()
                    .all(|(i, &w)| w == 0.0 || sp.open_count(i) == 0)
            })
    }

    /// Largest state-wise gap between the measure and its red/blue mirror.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.space.multisets();
        let mut worst = 0.0f64;
        for &r in RootStatus::ALL.iter() {
            let a = r.index();
            let b = r.swapped().index();
            for i in 0..m {
                let j = self.space.swapped_index(i);
                let gap = (self.mass[a * m + i] - self.mass[b * m + j]).abs();
                worst = worst.max(gap);
            }
        }
        worst
    }

    /// Smallest mass entry (negative entries signal a broken kernel).
    pub fn min_mass(&self) -> f64 {
        self.mass.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Total variation distance to a finite distribution over states.
    pub fn total_variation(&self, other: &HashMap<TreeState, f64>) -> f64 {
        let mut matched = vec![0.0f64; self.mass.len()];
        let mut outside = Vec::new();
        for (s, &w) in other {
            match self.index(s) {
                Ok(i) => matched[i] += w,
                Err(_) => outside.push(w.abs()),
            }
        }
        let inside = compensated_sum(self.mass.iter().zip(&matched).map(|(a, b)| (a - b).abs()));
        0.5 * (inside + compensated_sum(outside))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(d: usize) -> Arc<StateSpace> {
        Arc::new(StateSpace::new(d).unwrap())
    }

    #[test]
    fn initial_measure_properties() {
        let mu = Measure::initial(space(5));
        let s = TreeState::new(RootStatus::Uncolored, vec![NeighborDescriptor::open(0, 0); 5]);
        assert_eq!(mu.get(&s), 1.0);
        assert_eq!(mu.total_mass(), 1.0);
        assert_eq!(mu.root_type_mass(VertexType::new(0, 0)), 1.0);
        assert_eq!(mu.root_type_mass(VertexType::new(0, 1)), 0.0);
        assert_eq!(mu.uncolored_edge_mass(), 1.0);
        assert_eq!(mu.support_size(), 1);
    }

    #[test]
    fn uncolored_edge_mass_examples() {
        let sp = space(5);
        let mut n = vec![NeighborDescriptor::ColoredRed];
        n.extend(vec![NeighborDescriptor::open(0, 0); 4]);
        let mu = Measure::from_states(sp.clone(), [(TreeState::new(RootStatus::Uncolored, n.clone()), 1.0)]).unwrap();
        assert!((mu.uncolored_edge_mass() - 0.8).abs() < 1e-15);
        let colored = Measure::from_states(sp, [(TreeState::new(RootStatus::red(false), n), 1.0)]).unwrap();
        assert_eq!(colored.uncolored_edge_mass(), 0.0);
    }

    #[test]
    fn type_masses_partition_the_measure() {
        let sp = space(4);
        let states = vec![
            (TreeState::new(RootStatus::Uncolored, vec![NeighborDescriptor::ColoredRed, NeighborDescriptor::ColoredBlue, NeighborDescriptor::open(1, 1), NeighborDescriptor::open(0, 0)]), 0.25),
            (TreeState::new(RootStatus::Uncolored, vec![NeighborDescriptor::ColoredRed, NeighborDescriptor::ColoredRed, NeighborDescriptor::ColoredBlue, NeighborDescriptor::open(0, 2)]), 0.25),
            (TreeState::new(RootStatus::blue(true), vec![NeighborDescriptor::ColoredBlue; 4]), 0.5),
        ];
        let mu = Measure::from_states(sp, states).unwrap();
        let typed: f64 = mu.root_type_masses().iter().map(|(_, w)| w).sum();
        assert!((typed + mu.colored_root_mass() - 1.0).abs() < 1e-15);
        assert_eq!(mu.root_type_mass(VertexType::new(2, 1)), 0.25);
        assert_eq!(mu.root_type_mass(VertexType::new(1, 1)), 0.25);
    }

    #[test]
    fn symmetry_defect_detects_asymmetry() {
        let sp = space(3);
        let s = TreeState::new(RootStatus::red(false), vec![NeighborDescriptor::ColoredBlue; 3]);
        let mut mu = Measure::from_states(sp, [(s.clone(), 0.5), (s.swapped(), 0.5)]).unwrap();
        assert_eq!(mu.symmetry_defect(), 0.0);
        mu.set(&s, 0.4).unwrap();
        assert!((mu.symmetry_defect() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn total_variation_basics() {
        let sp = space(3);
        let mu = Measure::initial(sp);
        let mut other = HashMap::new();
        for (s, w) in mu.iter() {
            other.insert(s, w);
        }
        assert_eq!(mu.total_variation(&other), 0.0);
        let s = TreeState::new(RootStatus::red(false), vec![NeighborDescriptor::ColoredBlue; 3]);
        let mut far = HashMap::new();
        far.insert(s, 1.0);
        assert!((mu.total_variation(&far) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let vals = vec![1.0, 1e-16, 1e-16, 1e-16, 1e-16, -1.0];
        assert!((compensated_sum(vals) - 4e-16).abs() < 1e-30);
    }
}
